"""Monte Carlo confrontation of the simulator with every closed-form claim.

Each check is a pure function of its configuration and seeds, reports an
auditable (estimate, standard error, multiplier) gate or an explicit
distance threshold, and never repairs data: exact invariants use zero
tolerance, statistical gates default to 4 standard errors (per-check false
alarm rate ~1e-4 under the normal approximation).

Stream bookkeeping: the suite partitions the stream_id space of a single
master seed into disjoint blocks, ``(family_code * 16 + triple_index) << 40``
plus a trial offset, so any subset of checks can be re-run in isolation and
reproduce the same numbers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytics import (
    GammaLaw,
    gamma_cdf,
    limit_law,
    martingale_transform,
    l1_bound,
    mean_w,
    mgf_w,
    var_w,
)
from .model import ModelParams, UrnState, validate
from .simulate import sample_states


class TooFewTrials(ValueError):
    """Statistical gates need at least MIN_TRIALS samples to be meaningful."""


class ConfigError(ValueError):
    """Malformed suite configuration; the message names the offending field."""


MIN_TRIALS = 1000

_FAMILY_CODES = {"moments": 0, "mgf": 1, "ks": 2, "total": 2, "martingale": 4, "l1": 5}
_BLOCK = 1 << 40
_BRANCH_SPACING = 1 << 28


def _stream_base(family: str, triple_index: int) -> int:
    return (_FAMILY_CODES[family] * 16 + triple_index) * _BLOCK


@dataclass(frozen=True)
class SampleSet:
    """W(t) (and paired B(t)) over independent trials, reproducible from seeds."""

    params: ModelParams
    t: float
    values: np.ndarray
    blue_values: np.ndarray | None
    seed: int
    stream_base: int

    @property
    def trials(self) -> int:
        return len(self.values)

    @property
    def seeds(self) -> list[tuple[int, int]]:
        return [(self.seed, self.stream_base + i) for i in range(self.trials)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    detail: dict


def collect_samples(
    params: ModelParams,
    t: float,
    trials: int,
    seed: int,
    stream_base: int = 0,
    parallelism: int = 1,
) -> SampleSet:
    """One (W(t), B(t)) record per trial from independent streams."""
    validate(params)
    if trials < 1:
        raise TooFewTrials(f"trials must be >= 1, got {trials}")
    arr = sample_states(params, [t], trials, seed, stream_base, parallelism)
    return SampleSet(
        params=params,
        t=t,
        values=arr[:, 0, 0].copy(),
        blue_values=arr[:, 0, 1].copy(),
        seed=seed,
        stream_base=stream_base,
    )


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(n))


def _gap_in_se(estimate: float, target: float, se: float) -> float:
    # degenerate samples (e.g. t = 0) have zero SE: exact agreement passes,
    # any gap is an unambiguous failure
    if se > 0.0:
        return abs(estimate - target) / se
    return 0.0 if estimate == target else math.inf


def _var_se(x: np.ndarray) -> tuple[float, float]:
    # standard error of the sample variance from the fourth central moment
    n = len(x)
    s2 = float(x.var(ddof=1))
    m4 = float(((x - x.mean()) ** 4).mean())
    inner = max(m4 - s2 * s2 * (n - 3) / (n - 1), 0.0)
    return s2, math.sqrt(inner / n)


def moment_check(samples: SampleSet, multiplier: float = 4.0) -> CheckResult:
    """Sample mean and variance against mean_w / var_w, each within multiplier*SE."""
    if samples.trials < MIN_TRIALS:
        raise TooFewTrials(f"moment check needs >= {MIN_TRIALS} trials, got {samples.trials}")
    x = samples.values.astype(np.float64)
    mean_hat, se_mean = _mean_se(x)
    var_hat, se_var = _var_se(x)
    mean_ref = mean_w(samples.params, samples.t)
    var_ref = var_w(samples.params, samples.t)
    z_mean = _gap_in_se(mean_hat, mean_ref, se_mean)
    z_var = _gap_in_se(var_hat, var_ref, se_var)
    statistic = max(z_mean, z_var)
    return CheckResult(
        name="moments",
        statistic=statistic,
        threshold=multiplier,
        passed=statistic <= multiplier,
        detail={
            "t": samples.t,
            "trials": samples.trials,
            "mean_estimate": mean_hat,
            "mean_reference": mean_ref,
            "mean_se": se_mean,
            "mean_gap_in_se": z_mean,
            "var_estimate": var_hat,
            "var_reference": var_ref,
            "var_se": se_var,
            "var_gap_in_se": z_var,
        },
    )


def mgf_check(
    samples: SampleSet,
    u_grid: list[float],
    multiplier: float = 4.0,
    allow_positive_u: bool = False,
) -> CheckResult:
    """Empirical E[exp(u W(t))] against the closed form on every grid point.

    Positive u makes exp(u W) heavy-tailed and the SE estimate unreliable, so
    u > 0 is rejected unless explicitly opted in, and even then only with the
    variance margin 2u inside the MGF domain.
    """
    if samples.trials < MIN_TRIALS:
        raise TooFewTrials(f"MGF check needs >= {MIN_TRIALS} trials, got {samples.trials}")
    x = samples.values.astype(np.float64)
    points = []
    worst = 0.0
    for u in u_grid:
        if u > 0.0 and not allow_positive_u:
            raise ValueError(f"u={u} > 0 needs allow_positive_u=True (heavy-tailed estimator)")
        reference = mgf_w(samples.params, samples.t, u)
        if u > 0.0:
            mgf_w(samples.params, samples.t, 2.0 * u)  # variance margin; raises OutOfDomain
        est, se = _mean_se(np.exp(u * x))
        z = _gap_in_se(est, reference, se)
        worst = max(worst, z)
        points.append({"u": u, "estimate": est, "reference": reference, "se": se, "gap_in_se": z})
    return CheckResult(
        name="mgf",
        statistic=worst,
        threshold=multiplier,
        passed=worst <= multiplier,
        detail={"t": samples.t, "trials": samples.trials, "points": points},
    )


def ks_statistic(values: np.ndarray, cdf) -> float:
    """sup_x |F_n(x) - F(x)| for a continuous reference CDF."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = len(v)
    f = np.array([cdf(x) for x in v])
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def ks_check(samples: SampleSet, law: GammaLaw | None = None, threshold: float = 0.03) -> CheckResult:
    """Kolmogorov-Smirnov distance of W(t)/t from the gamma limit law.

    The convergence is asymptotic; the default threshold 0.03 is a documented
    operating point for t = 200 and 10^4 trials, not a limit statement.
    """
    if samples.trials < MIN_TRIALS:
        raise TooFewTrials(f"KS check needs >= {MIN_TRIALS} trials, got {samples.trials}")
    if samples.t <= 0.0:
        raise ValueError("KS check needs t > 0 to scale by t")
    if law is None:
        law = limit_law(samples.params)
    scaled = samples.values.astype(np.float64) / samples.t
    d = ks_statistic(scaled, lambda x: gamma_cdf(law, x))
    return CheckResult(
        name="ks",
        statistic=d,
        threshold=threshold,
        passed=d <= threshold,
        detail={
            "t": samples.t,
            "trials": samples.trials,
            "shape": law.shape,
            "scale": law.scale,
            "ks_distance": d,
        },
    )


def total_check(samples: SampleSet, threshold: float = 0.03) -> CheckResult:
    """Exact pairing invariants plus the gamma limit of the blue count.

    Zero tolerance on B - W = delta and on the total-count reconstruction
    tau = W + B = 2W + delta, then the same KS gate as ks_check applied to
    B(t)/t (B/t and W/t share the limit because delta/t vanishes).
    """
    if samples.blue_values is None:
        raise ValueError("total check needs paired (white, blue) samples")
    if samples.trials < MIN_TRIALS:
        raise TooFewTrials(f"total check needs >= {MIN_TRIALS} trials, got {samples.trials}")
    w = samples.values
    b = samples.blue_values
    delta = samples.params.delta
    differential_violations = int(np.count_nonzero(b - w != delta))
    tau_violations = int(np.count_nonzero(w + b != 2 * w + delta))
    law = limit_law(samples.params)
    scaled = b.astype(np.float64) / samples.t
    d = ks_statistic(scaled, lambda x: gamma_cdf(law, x))
    passed = differential_violations == 0 and tau_violations == 0 and d <= threshold
    return CheckResult(
        name="total",
        statistic=d,
        threshold=threshold,
        passed=passed,
        detail={
            "t": samples.t,
            "trials": samples.trials,
            "differential_violations": differential_violations,
            "tau_violations": tau_violations,
            "blue_ks_distance": d,
        },
    )


def martingale_check(
    params: ModelParams,
    s: float,
    t: float,
    trials: int,
    seed: int,
    branch_count: int = 5,
    multiplier: float = 4.0,
    stream_base: int = 0,
    parallelism: int = 1,
) -> CheckResult:
    """Conditional-expectation test of the transformed count vector.

    Realizes ``branch_count`` states at time s, branches ``trials``
    continuations to time t from each (restarting is legitimate: the state is
    Markov and waits are memoryless), and requires the averaged transform at
    t to match the transform of the branch state at s within multiplier*SE,
    componentwise, at every branch point. At s = 0 this reduces to the mean
    identity E[(W, B)](t) = (w0 + a*delta*t, w0 + delta + a*delta*t).
    """
    validate(params)
    if not 0.0 <= s <= t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    if trials < MIN_TRIALS:
        raise TooFewTrials(f"martingale check needs >= {MIN_TRIALS} trials, got {trials}")
    if trials >= _BRANCH_SPACING:
        raise ConfigError(f"trials must be < {_BRANCH_SPACING} per branch")
    if t == s:
        return CheckResult(
            name="martingale",
            statistic=0.0,
            threshold=multiplier,
            passed=True,
            detail={"s": s, "t": t, "branches": []},
        )

    if s == 0.0:
        branch_states = [UrnState(params.w0, params.b0, 0.0)] * branch_count
    else:
        realizations = sample_states(params, [s], branch_count, seed, stream_base, parallelism)
        branch_states = [
            UrnState(int(realizations[r, 0, 0]), int(realizations[r, 0, 1]), s)
            for r in range(branch_count)
        ]

    worst = 0.0
    branches = []
    for r, st in enumerate(branch_states):
        anchor = martingale_transform(params, s, st)
        cont_params = ModelParams(params.a, params.delta, st.white)
        cont_base = stream_base + (r + 1) * _BRANCH_SPACING
        arr = sample_states(cont_params, [t - s], trials, seed, cont_base, parallelism)
        wt = arr[:, 0, 0].astype(np.float64)
        bt = arr[:, 0, 1].astype(np.float64)
        gaps = []
        for comp, target in zip(_transform_components(params.a, t, wt, bt), anchor):
            est, se = _mean_se(comp)
            z = _gap_in_se(est, target, se)
            gaps.append({"estimate": est, "target": target, "se": se, "gap_in_se": z})
            worst = max(worst, z)
        branches.append(
            {"state_at_s": [st.white, st.blue], "white_gap": gaps[0], "blue_gap": gaps[1]}
        )
    return CheckResult(
        name="martingale",
        statistic=worst,
        threshold=multiplier,
        passed=worst <= multiplier,
        detail={"s": s, "t": t, "trials": trials, "branches": branches},
    )


def _transform_components(a: int, t: float, w: np.ndarray, b: np.ndarray):
    # vectorized (I - tB) @ (w, b); same arithmetic as martingale_transform
    at = a * t
    return ((1.0 + at) * w - at * b, at * w + (1.0 - at) * b)


def l1_check(
    params: ModelParams,
    t_grid: list[float],
    trials: int,
    seed: int,
    multiplier: float = 4.0,
    stream_base: int = 0,
    parallelism: int = 1,
) -> CheckResult:
    """Empirical E|W(t)/t - a*delta| under the closed-form bound at every grid time."""
    validate(params)
    if any(t <= 0.0 for t in t_grid):
        raise ValueError("l1 check needs t > 0")
    if trials < MIN_TRIALS:
        raise TooFewTrials(f"l1 check needs >= {MIN_TRIALS} trials, got {trials}")
    times = sorted(t_grid)
    arr = sample_states(params, times, trials, seed, stream_base, parallelism)
    target = params.a * params.delta
    worst = -math.inf
    points = []
    for j, t in enumerate(times):
        dev = np.abs(arr[:, j, 0].astype(np.float64) / t - target)
        est, se = _mean_se(dev)
        bound = l1_bound(params, t)
        slack = (est - bound) / se
        worst = max(worst, slack)
        points.append({"t": t, "estimate": est, "bound": bound, "se": se, "slack_in_se": slack})
    return CheckResult(
        name="l1",
        statistic=worst,
        threshold=multiplier,
        passed=worst <= multiplier,
        detail={"trials": trials, "points": points},
    )


# ---------------------------------------------------------------------------
# suite orchestration


_DEFAULT_TRIPLES = (ModelParams(1, 1, 0), ModelParams(2, 2, 2), ModelParams(1, 3, 5))
_ALL_CHECKS = ("moments", "mgf", "ks", "total", "martingale", "l1")


@dataclass(frozen=True)
class VerifyConfig:
    """Everything run_suite needs; defaults give 6 check families over 3 triples."""

    params_list: tuple[ModelParams, ...] = _DEFAULT_TRIPLES
    master_seed: int = 42
    trials: int = 10_000
    checks: tuple[str, ...] = _ALL_CHECKS
    se_multiplier: float = 4.0
    moment_t: float = 10.0
    mgf_t: float = 1.0
    mgf_u_grid: tuple[float, ...] = (-2.0, -1.0, -0.5, -0.1)
    ks_t: float = 200.0
    ks_threshold: float = 0.03
    martingale_s: float = 2.0
    martingale_t: float = 5.0
    martingale_branches: int = 5
    l1_times: tuple[float, ...] = (1.0, 10.0, 100.0)
    parallelism: int = 1

    def echo(self) -> dict:
        return {
            "params_list": [[p.a, p.delta, p.w0] for p in self.params_list],
            "master_seed": self.master_seed,
            "trials": self.trials,
            "checks": list(self.checks),
            "se_multiplier": self.se_multiplier,
            "moment_t": self.moment_t,
            "mgf_t": self.mgf_t,
            "mgf_u_grid": list(self.mgf_u_grid),
            "ks_t": self.ks_t,
            "ks_threshold": self.ks_threshold,
            "martingale_s": self.martingale_s,
            "martingale_t": self.martingale_t,
            "martingale_branches": self.martingale_branches,
            "l1_times": list(self.l1_times),
            "parallelism": self.parallelism,
        }


@dataclass
class ExperimentReport:
    """Suite output: config echo, per-check results, seed manifest.

    The serialized forms are deterministic functions of config and seeds;
    wall-clock time is kept on the object but excluded from artifacts unless
    explicitly requested, so identical invocations produce identical bytes.
    """

    config: dict
    results: list[CheckResult] = field(default_factory=list)
    seed_manifest: dict = field(default_factory=dict)
    elapsed_seconds: float | None = None

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_payload(self, include_timing: bool = False) -> dict:
        payload = {
            "version": __version__,
            "config": self.config,
            "seed_manifest": self.seed_manifest,
            "results": [
                {
                    "name": r.name,
                    "statistic": r.statistic,
                    "threshold": r.threshold,
                    "passed": r.passed,
                    "detail": r.detail,
                }
                for r in self.results
            ],
            "all_passed": self.all_passed,
        }
        if include_timing:
            payload["elapsed_seconds"] = self.elapsed_seconds
        return payload

    def to_json(self, include_timing: bool = False) -> str:
        import json

        return json.dumps(self.to_payload(include_timing), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"{'check':<42} {'statistic':>12} {'threshold':>10}  result"]
        for r in self.results:
            lines.append(
                f"{r.name:<42} {r.statistic:>12.6g} {r.threshold:>10.6g}  "
                f"{'PASS' if r.passed else 'FAIL'}"
            )
        n_pass = sum(r.passed for r in self.results)
        lines.append(f"overall: {'PASS' if self.all_passed else 'FAIL'} ({n_pass}/{len(self.results)})")
        return "\n".join(lines) + "\n"


def run_suite(config: VerifyConfig) -> ExperimentReport:
    """Run the enabled checks over the parameter matrix, deterministically.

    Check families run block by block on disjoint stream ranges, so results
    are independent of execution interleaving and of which other families are
    enabled. Raises ConfigError on malformed configuration.
    """
    for i, name in enumerate(config.checks):
        if name not in _ALL_CHECKS:
            raise ConfigError(f"checks[{i}]: unknown check {name!r}; valid: {_ALL_CHECKS}")
    if config.checks and config.trials < MIN_TRIALS:
        raise ConfigError(f"trials: need >= {MIN_TRIALS} for statistical gates, got {config.trials}")
    for i, p in enumerate(config.params_list):
        try:
            validate(p)
        except ValueError as exc:
            raise ConfigError(f"params_list[{i}]: {exc}") from exc

    started = time.perf_counter()
    report = ExperimentReport(config=config.echo())
    seed = config.master_seed

    for triple_index, params in enumerate(config.params_list):
        tag = f"[a={params.a},delta={params.delta},w0={params.w0}]"
        scaled_samples: SampleSet | None = None

        def scaled_block() -> SampleSet:
            nonlocal scaled_samples
            if scaled_samples is None:
                base = _stream_base("ks", triple_index)
                scaled_samples = collect_samples(
                    params, config.ks_t, config.trials, seed, base, config.parallelism
                )
                report.seed_manifest[f"ks/total{tag}"] = {
                    "seed": seed,
                    "stream_base": base,
                    "trials": config.trials,
                    "t": config.ks_t,
                }
            return scaled_samples

        for family in config.checks:
            if family == "moments":
                base = _stream_base(family, triple_index)
                samples = collect_samples(
                    params, config.moment_t, config.trials, seed, base, config.parallelism
                )
                report.seed_manifest[f"moments{tag}"] = {
                    "seed": seed,
                    "stream_base": base,
                    "trials": config.trials,
                    "t": config.moment_t,
                }
                result = moment_check(samples, config.se_multiplier)
            elif family == "mgf":
                base = _stream_base(family, triple_index)
                samples = collect_samples(
                    params, config.mgf_t, config.trials, seed, base, config.parallelism
                )
                report.seed_manifest[f"mgf{tag}"] = {
                    "seed": seed,
                    "stream_base": base,
                    "trials": config.trials,
                    "t": config.mgf_t,
                }
                result = mgf_check(samples, list(config.mgf_u_grid), config.se_multiplier)
            elif family == "ks":
                result = ks_check(scaled_block(), threshold=config.ks_threshold)
            elif family == "total":
                result = total_check(scaled_block(), threshold=config.ks_threshold)
            elif family == "martingale":
                base = _stream_base(family, triple_index)
                report.seed_manifest[f"martingale{tag}"] = {
                    "seed": seed,
                    "stream_base": base,
                    "trials": config.trials,
                    "s": config.martingale_s,
                    "t": config.martingale_t,
                    "branches": config.martingale_branches,
                }
                result = martingale_check(
                    params,
                    config.martingale_s,
                    config.martingale_t,
                    config.trials,
                    seed,
                    config.martingale_branches,
                    config.se_multiplier,
                    base,
                    config.parallelism,
                )
            else:  # l1
                base = _stream_base(family, triple_index)
                report.seed_manifest[f"l1{tag}"] = {
                    "seed": seed,
                    "stream_base": base,
                    "trials": config.trials,
                    "times": list(config.l1_times),
                }
                result = l1_check(
                    params,
                    list(config.l1_times),
                    config.trials,
                    seed,
                    config.se_multiplier,
                    base,
                    config.parallelism,
                )
            report.results.append(
                CheckResult(
                    name=result.name + tag,
                    statistic=result.statistic,
                    threshold=result.threshold,
                    passed=result.passed,
                    detail=result.detail,
                )
            )

    report.elapsed_seconds = time.perf_counter() - started
    return report
