"""Acceptance gate: one test per criterion, each printing its own pass/fail line.

The heavy sample blocks (10^4 trajectories to t=200, 10^5 to t=10) are
collected once per session and shared between criteria. Every tolerance is
pinned here, not computed at run time.
"""

import math

import numpy as np
import pytest

from conftest import TRIPLES
from cdpolya.analytics import (
    GammaLaw,
    gamma_cdf,
    gamma_ppf,
    integrate_characteristic_ode,
    l1_bound,
    limit_law,
    characteristic_curve,
    martingale_transform,
    mean_w,
    mgf_domain_bound,
    mgf_w,
    pde_residual,
    pde_residual_bivariate,
    second_moment_w,
    var_w,
)
from cdpolya.cli import main
from cdpolya.model import ModelParams, UrnState
from cdpolya.simulate import sample_states
from cdpolya.verify import (
    collect_samples,
    ks_check,
    ks_statistic,
    l1_check,
    martingale_check,
    mgf_check,
    moment_check,
)

PARALLELISM = 2
SEED = 20_240_817

P110 = ModelParams(1, 1, 0)


def _report(criterion: str, passed: bool, summary: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {summary}")
    assert passed, f"{criterion}: {summary}"


@pytest.fixture(scope="session")
def scaled_samples():
    # shared by criteria 7 and 8: 10^4 paired records at t=200 per triple
    return {
        p: collect_samples(p, 200.0, 10_000, SEED, stream_base=i << 41, parallelism=PARALLELISM)
        for i, p in enumerate(TRIPLES)
    }


@pytest.fixture(scope="session")
def moment_samples():
    # shared by criteria 2 and 4: 10^5 records at t=10 and t=1
    at10 = {
        p: collect_samples(p, 10.0, 100_000, SEED, stream_base=(16 + i) << 41, parallelism=PARALLELISM)
        for i, p in enumerate(TRIPLES)
    }
    at1 = collect_samples(P110, 1.0, 100_000, SEED, stream_base=32 << 41, parallelism=PARALLELISM)
    return at10, at1


def test_c01_exact_invariants_on_every_epoch():
    # 10^4 trajectories to t=50 per triple; the engine validates B-W=delta,
    # the white lattice, nonnegativity, and tau=W+B=2W+delta at every epoch
    # and raises on the first violation; the final states are re-checked here.
    worst_events = 0
    for i, p in enumerate(TRIPLES):
        arr = sample_states(p, [50.0], 10_000, SEED, stream_base=(48 + i) << 41,
                            parallelism=PARALLELISM)
        w, b = arr[:, 0, 0], arr[:, 0, 1]
        assert np.all(b - w == p.delta)
        assert np.all(w % p.a == p.w0 % p.a)
        assert np.all(w >= 0)
        assert np.all(w + b == 2 * w + p.delta)
        worst_events = max(worst_events, int(w.max()))
    _report("01 exact-invariants", True, f"3 x 10^4 trajectories to t=50, zero violations")


def test_c02_moment_agreement(moment_samples):
    at10, _ = moment_samples
    lines = []
    ok = True
    for p in TRIPLES:
        res = moment_check(at10[p], multiplier=4.0)
        ok &= res.passed
        lines.append(
            f"({p.a},{p.delta},{p.w0}): mean gap {res.detail['mean_gap_in_se']:.2f} SE, "
            f"var gap {res.detail['var_gap_in_se']:.2f} SE"
        )
    _report("02 moments", ok, "; ".join(lines))


def test_c02b_variance_display_discrepancy_resolved_by_second_moment_identity(moment_samples):
    # var_w is pinned to second_moment_w - mean_w^2 = a^2 t (2 w0 + delta + a delta t).
    # The alternative display a^2 t (w0 + delta + a delta t) disagrees with the
    # second moment whenever w0 > 0; 10^5 samples decisively separate the two.
    at10, _ = moment_samples
    p, t = ModelParams(1, 3, 5), 10.0
    assert var_w(p, t) == second_moment_w(p, t) - mean_w(p, t) ** 2
    x = at10[p].values.astype(float)
    n = len(x)
    s2 = x.var(ddof=1)
    m4 = ((x - x.mean()) ** 4).mean()
    se = math.sqrt((m4 - s2 * s2 * (n - 3) / (n - 1)) / n)
    consistent = abs(s2 - var_w(p, t)) <= 4.0 * se
    alternative = p.a**2 * t * (p.w0 + p.delta + p.a * p.delta * t)
    separated = abs(s2 - alternative) > 4.0 * se
    _report(
        "02b variance-identity",
        consistent and separated,
        f"sample var {s2:.1f} vs identity-consistent {var_w(p, t):.0f} "
        f"(within {abs(s2 - var_w(p, t)) / se:.2f} SE) vs alternative {alternative:.0f} "
        f"(excluded at {abs(s2 - alternative) / se:.1f} SE)",
    )


def test_c03_mgf_closed_form_vs_ode_oracle():
    worst = 0.0
    for p in TRIPLES:
        for t in (0.5, 1.0, 5.0, 20.0):
            for u in (-2.0, -1.0, -0.5, -0.1, 0.5 * mgf_domain_bound(p, t)):
                closed = mgf_w(p, t, u)
                oracle = integrate_characteristic_ode(p, t, u, 4000)
                worst = max(worst, abs(closed - oracle) / abs(closed))
    _report("03 mgf-vs-oracle", worst <= 1e-6, f"worst relative gap {worst:.3g} <= 1e-6")


def test_c04_empirical_mgf(moment_samples):
    _, at1 = moment_samples
    res = mgf_check(at1, [-1.0], multiplier=4.0)
    point = res.detail["points"][0]
    reference = 1.0 / (2.0 - math.exp(-1.0))
    assert point["reference"] == pytest.approx(reference, abs=1e-12)
    _report(
        "04 empirical-mgf",
        res.passed,
        f"E[exp(-W(1))] = {point['estimate']:.5f} vs {reference:.5f} "
        f"({point['gap_in_se']:.2f} SE, 10^5 trials)",
    )


def test_c05_pde_residual_decay_and_bivariate_identity():
    points = [(1.0, -0.5), (2.0, -1.0), (5.0, -0.1)]
    slopes = []
    for (t, u) in points:
        hs = [1e-2, 1e-3, 1e-4]
        rs = [abs(pde_residual(P110, t, u, h)) for h in hs]
        slopes.append(float(np.polyfit(np.log(hs), np.log(rs), 1)[0]))
    slope_ok = all(abs(s - 2.0) <= 0.2 for s in slopes)
    biv_worst = max(
        abs(pde_residual(p, t, u, 1e-3) - pde_residual_bivariate(p, t, u, 1e-3))
        for p in TRIPLES
        for (t, u) in [(1.0, -0.5), (2.0, -1.0)]
    )
    ok = slope_ok and biv_worst <= 1e-8
    _report(
        "05 pde-residual",
        ok,
        f"slopes {[f'{s:.3f}' for s in slopes]} in 2 +- 0.2; "
        f"bivariate gap {biv_worst:.2g} <= 1e-8",
    )


def test_c06_characteristic_ode_autonomous_form_resolves_printed_argument_discrepancy():
    # the closed-form curves satisfy C'(s) = 2 - e^{-aC(s)} - e^{aC(s)}
    # (exponent carries C(s), not the bare integration variable s)
    h = 1e-6
    worst = 0.0
    for p in TRIPLES:
        for (t, u) in [(1.0, -1.0), (3.0, -0.3), (2.0, 0.4 * mgf_domain_bound(p, 2.0))]:
            for s in np.linspace(0.05, t - 0.05, 9):
                lhs = (
                    characteristic_curve(p, t, u, s + h)
                    - characteristic_curve(p, t, u, s - h)
                ) / (2 * h)
                c = characteristic_curve(p, t, u, s)
                rhs = 2.0 - math.exp(-p.a * c) - math.exp(p.a * c)
                worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    _report("06 characteristic-ode", worst <= 1e-7, f"worst relative defect {worst:.3g}")


def test_c07_gamma_limit_with_controls(scaled_samples):
    lines = []
    ok = True
    for p in TRIPLES:
        res = ks_check(scaled_samples[p], threshold=0.03)
        ok &= res.passed
        lines.append(f"({p.a},{p.delta},{p.w0}): D={res.statistic:.4f}")

    # positive control: exact inverse-CDF draws from the law itself
    law = limit_law(ModelParams(2, 2, 2))
    gen = np.random.Generator(np.random.PCG64(SEED))
    exact = np.array([gamma_ppf(law, u) for u in gen.random(10_000)])
    d_pos = ks_statistic(exact, lambda x: gamma_cdf(law, x))
    ok &= d_pos <= 0.03

    # negative control: shape off by one must fail decisively
    wrong = GammaLaw(law.shape + 1.0, law.scale)
    bad = np.array([gamma_ppf(wrong, u) for u in gen.random(10_000)])
    d_neg = ks_statistic(bad, lambda x: gamma_cdf(law, x))
    ok &= d_neg > 0.03

    _report(
        "07 gamma-limit",
        ok,
        "; ".join(lines) + f"; positive control D={d_pos:.4f}, negative control D={d_neg:.3f}",
    )


def test_c08_blue_count_limit_and_total_reconstruction(scaled_samples):
    lines = []
    ok = True
    for p in TRIPLES:
        s = scaled_samples[p]
        w, b = s.values, s.blue_values
        exact = bool(np.all(b - w == p.delta) and np.all(w + b == 2 * w + p.delta))
        law = limit_law(p)
        d = ks_statistic(b.astype(float) / s.t, lambda x: gamma_cdf(law, x))
        ok &= exact and d <= 0.03
        lines.append(f"({p.a},{p.delta},{p.w0}): B/t D={d:.4f}, tau exact={exact}")
    _report("08 blue-and-total-limits", ok, "; ".join(lines))


def test_c09_martingale_branching():
    res = martingale_check(
        P110, 2.0, 5.0, 10_000, SEED, branch_count=5,
        multiplier=4.0, stream_base=64 << 41, parallelism=PARALLELISM,
    )
    # s = 0 reduces to the mean-vector identity E[X(t)] = (w0 + a d t, w0 + d + a d t)
    res0 = martingale_check(
        P110, 0.0, 3.0, 10_000, SEED, branch_count=1,
        multiplier=4.0, stream_base=65 << 41, parallelism=PARALLELISM,
    )
    anchor = martingale_transform(P110, 0.0, UrnState(0, 1))
    assert res0.detail["branches"][0]["white_gap"]["target"] == anchor[0]
    _report(
        "09 martingale",
        res.passed and res0.passed,
        f"branching gap {res.statistic:.2f} SE over 5 states; "
        f"s=0 mean identity gap {res0.statistic:.2f} SE",
    )


def test_c10_l1_bound():
    lines = []
    ok = True
    for i, p in enumerate(TRIPLES):
        res = l1_check(p, [1.0, 10.0, 100.0], 5000, SEED,
                       multiplier=4.0, stream_base=(80 + i) << 41, parallelism=PARALLELISM)
        ok &= res.passed
        worst = max(pt["estimate"] - pt["bound"] for pt in res.detail["points"])
        lines.append(f"({p.a},{p.delta},{p.w0}): max excess {worst:.3f}")
    assert l1_bound(P110, 1.0) == pytest.approx(math.sqrt(2.0))
    _report("10 l1-bound", ok, "; ".join(lines) + "; bound(1,1,0; t=1) = sqrt(2)")


def test_c11_verify_reports_byte_identical(tmp_path):
    args = [
        "verify", "--a", "1", "--delta", "1", "--w0", "0",
        "--trials", "1000", "--checks", "moments,mgf,martingale",
        "--seed", "7", "--parallelism", "2",
    ]
    assert main([*args, "--out", str(tmp_path / "r1")]) == 0
    assert main([*args, "--out", str(tmp_path / "r2")]) == 0
    j1 = (tmp_path / "r1" / "report.json").read_bytes()
    j2 = (tmp_path / "r2" / "report.json").read_bytes()
    t1 = (tmp_path / "r1" / "report.txt").read_bytes()
    t2 = (tmp_path / "r2" / "report.txt").read_bytes()
    _report(
        "11 determinism",
        j1 == j2 and t1 == t2,
        f"report.json ({len(j1)} bytes) and report.txt identical across reruns",
    )
