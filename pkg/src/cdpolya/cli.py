"""Batch front end: simulate campaigns, tabulate analytics, run the verify suite.

Subcommands
-----------
simulate   snapshot (default) or full-event records of seeded trajectories
analyze    closed-form tables: MGF grid vs ODE oracle, moments, limit law
verify     the statistical suite; exit status 0 iff every check passed

Flags override config-file values, which override built-in defaults. The
config file is flat ``key = value`` lines mirroring the long flag names
(list-valued keys take comma-separated values). Every artifact embeds the
package version, the fully-resolved config, and the seed manifest, and all
writes stay inside the chosen output directory. Identical invocations
produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analytics import l1_bound, limit_law, mean_vector, mean_w, mgf_grid, second_moment_w, var_w
from .model import ModelParams, validate
from .simulate import (
    RandomSource,
    sample_states,
    simulate_until,
    trajectories_json_payload,
    write_trajectories_csv,
)
from .verify import ConfigError, VerifyConfig, run_suite


class UsageError(ValueError):
    """Bad command line; the message includes usage text."""


_TRIAL_STREAM_SPACING = 1 << 40  # per-triple stream block in the simulate command


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want a typed error
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="cdpolya", description=__doc__, add_help=True)
    parser.add_argument("--version", action="version", version=f"cdpolya {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{simulate,analyze,verify}")

    def add_common(p: _Parser) -> None:
        p.add_argument("--config", help="flat key=value config file; flags override it")
        p.add_argument("--a", type=int, action="append", help="ball amount (repeatable)")
        p.add_argument("--delta", type=int, action="append", help="differential index (repeatable)")
        p.add_argument("--w0", type=int, action="append", help="initial white count (repeatable)")
        p.add_argument(
            "--t", type=float, action="append",
            help="time point, repeatable (verify: the deviation-bound grid)",
        )
        p.add_argument("--trials", type=int, help="trajectories per parameter triple")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory (created if missing)")
        p.add_argument("--format", choices=["csv", "json"], dest="fmt", help="artifact format")
        p.add_argument("--parallelism", type=int, help="worker threads (results are degree-independent)")

    p_sim = sub.add_parser("simulate", help="run seeded trajectories")
    add_common(p_sim)
    p_sim.add_argument(
        "--record-events",
        action="store_true",
        default=None,
        help="export the full epoch list instead of snapshots",
    )

    p_ana = sub.add_parser("analyze", help="tabulate closed forms")
    add_common(p_ana)
    p_ana.add_argument("--u", type=float, action="append", help="MGF grid point (repeatable)")
    p_ana.add_argument("--steps", type=int, help="ODE oracle step count")

    p_ver = sub.add_parser("verify", help="run the statistical suite")
    add_common(p_ver)
    p_ver.add_argument("--checks", help="comma-separated subset of moments,mgf,ks,total,martingale,l1")
    p_ver.add_argument("--ks-threshold", type=float, dest="ks_threshold")
    p_ver.add_argument("--se-multiplier", type=float, dest="se_multiplier")
    p_ver.add_argument("--ks-t", type=float, dest="ks_t", help="horizon for the distribution checks")
    p_ver.add_argument("--dump-samples", action="store_true", default=None, help="write per-check sample CSVs")
    return parser


_LIST_KEYS = {"a", "delta", "w0", "t", "u"}
_INT_KEYS = {"trials", "seed", "parallelism", "steps"}
_FLOAT_KEYS = {"ks-threshold", "se-multiplier", "ks-t"}
_BOOL_KEYS = {"record-events", "dump-samples"}
_STR_KEYS = {"out", "format", "checks"}


def _read_config_file(path: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        try:
            if key in _LIST_KEYS:
                items = [tok for tok in val.replace(",", " ").split() if tok]
                cast = float if key in ("t", "u") else int
                values[key] = [cast(tok) for tok in items]
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key in _BOOL_KEYS:
                values[key] = val.lower() in ("1", "true", "yes", "on")
            elif key in _STR_KEYS:
                values[key] = val
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


@dataclass
class RunConfig:
    """Fully-resolved invocation: subcommand, parameter matrix, knobs, output."""

    command: str
    params_list: list[ModelParams]
    times: list[float]
    trials: int
    master_seed: int
    out_dir: str
    fmt: str
    parallelism: int
    record_events: bool = False
    u_grid: list[float] | None = None
    steps: int = 4000
    checks: list[str] = field(default_factory=list)
    ks_threshold: float = 0.03
    se_multiplier: float = 4.0
    ks_t: float = 200.0
    dump_samples: bool = False

    def echo(self) -> dict:
        return {
            "command": self.command,
            "params_list": [[p.a, p.delta, p.w0] for p in self.params_list],
            "times": self.times,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "out": self.out_dir,
            "format": self.fmt,
            "parallelism": self.parallelism,
            "record_events": self.record_events,
            "u_grid": self.u_grid,
            "steps": self.steps,
            "checks": self.checks,
            "ks_threshold": self.ks_threshold,
            "se_multiplier": self.se_multiplier,
            "ks_t": self.ks_t,
        }


def _resolve(flag, file_value, default):
    if flag is not None:
        return flag
    if file_value is not None:
        return file_value
    return default


def _broadcast_triples(a_list, delta_list, w0_list) -> list[ModelParams]:
    lists = {"a": a_list, "delta": delta_list, "w0": w0_list}
    width = max(len(v) for v in lists.values())
    for name, vals in lists.items():
        if len(vals) not in (1, width):
            raise UsageError(
                f"--{name} given {len(vals)} values but the parameter matrix is {width} wide; "
                "repeatable flags must have matching lengths (or a single broadcast value)"
            )
    expand = lambda v: v * width if len(v) == 1 else v
    return [
        ModelParams(a, d, w0)
        for a, d, w0 in zip(expand(a_list), expand(delta_list), expand(w0_list))
    ]


def parse_config(argv: list[str]) -> RunConfig:
    """argv -> RunConfig; flags override config-file values.

    Raises UsageError for bad flags or a missing subcommand and ConfigError
    for config-file problems. Every parameter triple is validated before any
    work starts; an untenable triple is rejected here.
    """
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError(f"missing subcommand\n{parser.format_help()}")
    file_vals = _read_config_file(ns.config) if ns.config else {}

    # verify defaults to the canonical three-triple matrix; the other
    # commands default to the minimal configuration
    if ns.command == "verify":
        default_a, default_delta, default_w0 = [1, 2, 1], [1, 2, 3], [0, 2, 5]
    else:
        default_a, default_delta, default_w0 = [1], [1], [0]
    a_list = _resolve(ns.a, file_vals.get("a"), default_a)
    delta_list = _resolve(ns.delta, file_vals.get("delta"), default_delta)
    w0_list = _resolve(ns.w0, file_vals.get("w0"), default_w0)
    params_list = _broadcast_triples(a_list, delta_list, w0_list)
    for p in params_list:
        try:
            validate(p)
        except ValueError as exc:
            raise UsageError(f"untenable parameters (a={p.a}, delta={p.delta}, w0={p.w0}): {exc}")

    # verify consumes --t as the deviation-bound grid; the distribution
    # horizon has its own knob (--ks-t)
    default_times = {
        "simulate": [10.0],
        "analyze": [0.5, 1.0, 5.0, 20.0],
        "verify": [1.0, 10.0, 100.0],
    }
    times = [float(t) for t in _resolve(ns.t, file_vals.get("t"), default_times[ns.command])]
    if any(t < 0.0 for t in times):
        raise UsageError("--t values must be >= 0")
    if ns.command == "verify" and any(t <= 0.0 for t in times):
        raise UsageError("verify needs --t values > 0 (deviation-bound grid)")

    cfg = RunConfig(
        command=ns.command,
        params_list=params_list,
        times=times,
        trials=_resolve(ns.trials, file_vals.get("trials"), 100 if ns.command == "simulate" else 10_000),
        master_seed=_resolve(ns.seed, file_vals.get("seed"), 42),
        out_dir=_resolve(ns.out, file_vals.get("out"), "cdpolya_out"),
        fmt=_resolve(ns.fmt, file_vals.get("format"), "csv"),
        parallelism=_resolve(ns.parallelism, file_vals.get("parallelism"), 1),
    )
    if cfg.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {cfg.trials}")
    if cfg.parallelism < 1:
        raise UsageError(f"--parallelism must be >= 1, got {cfg.parallelism}")
    if cfg.master_seed < 0:
        raise UsageError(f"--seed must be >= 0, got {cfg.master_seed}")

    if ns.command == "simulate":
        cfg.record_events = bool(_resolve(ns.record_events, file_vals.get("record-events"), False))
    elif ns.command == "analyze":
        cfg.u_grid = _resolve(ns.u, file_vals.get("u"), None)
        cfg.steps = _resolve(ns.steps, file_vals.get("steps"), 4000)
        if cfg.steps < 1:
            raise UsageError(f"--steps must be >= 1, got {cfg.steps}")
    else:
        checks_raw = _resolve(ns.checks, file_vals.get("checks"), "moments,mgf,ks,total,martingale,l1")
        cfg.checks = [c.strip() for c in checks_raw.split(",") if c.strip()]
        cfg.ks_threshold = _resolve(ns.ks_threshold, file_vals.get("ks-threshold"), 0.03)
        cfg.se_multiplier = _resolve(ns.se_multiplier, file_vals.get("se-multiplier"), 4.0)
        cfg.ks_t = _resolve(ns.ks_t, file_vals.get("ks-t"), 200.0)
        cfg.dump_samples = bool(_resolve(ns.dump_samples, file_vals.get("dump-samples"), False))
    return cfg


# ---------------------------------------------------------------------------
# artifact writers


def _meta(cfg: RunConfig, seeds: dict) -> dict:
    return {"version": __version__, "config": cfg.echo(), "seeds": seeds}


def _write_csv(path: Path, meta: dict, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in meta.items():
            f.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_cell(x) for x in row) + "\n")


def _cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _cmd_simulate(cfg: RunConfig, out: Path) -> int:
    times = sorted(cfg.times)
    seeds = {
        "scheme": "RandomSource(seed, triple_index * 2**40 + trial)",
        "seed": cfg.master_seed,
        "trials": cfg.trials,
    }
    meta = _meta(cfg, seeds)
    if cfg.record_events:
        items = []
        for pi, params in enumerate(cfg.params_list):
            for i in range(cfg.trials):
                src = RandomSource(cfg.master_seed, pi * _TRIAL_STREAM_SPACING + i)
                items.append((pi * cfg.trials + i, simulate_until(params, max(times), src)))
        if cfg.fmt == "csv":
            write_trajectories_csv(out / "events.csv", items, meta)
        else:
            _write_json(out / "events.json", trajectories_json_payload(items, meta))
    else:
        rows = []
        for pi, params in enumerate(cfg.params_list):
            arr = sample_states(
                params, times, cfg.trials, cfg.master_seed,
                pi * _TRIAL_STREAM_SPACING, cfg.parallelism,
            )
            for i in range(cfg.trials):
                for j, t in enumerate(times):
                    w, b = int(arr[i, j, 0]), int(arr[i, j, 1])
                    rows.append((pi * cfg.trials + i, t, w, b, w + b))
        if cfg.fmt == "csv":
            _write_csv(out / "snapshots.csv", meta, ["trial", "t", "white", "blue", "total"], rows)
        else:
            payload = {
                "meta": meta,
                "snapshots": [
                    {"trial": r[0], "t": r[1], "white": r[2], "blue": r[3], "total": r[4]}
                    for r in rows
                ],
            }
            _write_json(out / "snapshots.json", payload)
    return 0


def _cmd_analyze(cfg: RunConfig, out: Path) -> int:
    meta = _meta(cfg, {})
    moment_rows = []
    law_rows = []
    for params in cfg.params_list:
        grid_rows = mgf_grid(params, cfg.times, cfg.u_grid, cfg.steps)
        grid_header = ["t", "u", "psi_closed_form", "psi_ode_oracle", "abs_diff"]
        stem = f"mgf_grid_a{params.a}_d{params.delta}_w{params.w0}"
        if cfg.fmt == "csv":
            _write_csv(out / f"{stem}.csv", meta, grid_header, grid_rows)
        else:
            _write_json(
                out / f"{stem}.json",
                {"meta": meta, "rows": [dict(zip(grid_header, r)) for r in grid_rows]},
            )
        for t in cfg.times:
            mw, mb = mean_vector(params, t)
            bound = l1_bound(params, t) if t > 0.0 else ""
            moment_rows.append(
                (params.a, params.delta, params.w0, t,
                 mean_w(params, t), var_w(params, t), second_moment_w(params, t), mw, mb, bound)
            )
        law = limit_law(params)
        law_rows.append((params.a, params.delta, params.w0, law.shape, law.scale, law.mean))

    moment_header = ["a", "delta", "w0", "t", "mean", "variance", "second_moment",
                     "mean_white", "mean_blue", "l1_bound"]
    law_header = ["a", "delta", "w0", "shape", "scale", "law_mean"]
    if cfg.fmt == "csv":
        _write_csv(out / "moments.csv", meta, moment_header, moment_rows)
        _write_csv(out / "limit_law.csv", meta, law_header, law_rows)
    else:
        _write_json(out / "moments.json",
                    {"meta": meta, "rows": [dict(zip(moment_header, r)) for r in moment_rows]})
        _write_json(out / "limit_law.json",
                    {"meta": meta, "rows": [dict(zip(law_header, r)) for r in law_rows]})
    return 0


def _cmd_verify(cfg: RunConfig, out: Path) -> int:
    vconfig = VerifyConfig(
        params_list=tuple(cfg.params_list),
        master_seed=cfg.master_seed,
        trials=cfg.trials,
        checks=tuple(cfg.checks),
        se_multiplier=cfg.se_multiplier,
        ks_t=cfg.ks_t,
        ks_threshold=cfg.ks_threshold,
        l1_times=tuple(cfg.times),
        parallelism=cfg.parallelism,
    )
    report = run_suite(vconfig)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    if cfg.dump_samples:
        _dump_suite_samples(cfg, vconfig, out)
    sys.stdout.write(report.to_text())
    if report.elapsed_seconds is not None:
        sys.stderr.write(f"verify suite completed in {report.elapsed_seconds:.1f}s\n")
    return 0 if report.all_passed else 1


def _dump_suite_samples(cfg: RunConfig, vconfig: VerifyConfig, out: Path) -> None:
    from .verify import _stream_base, collect_samples  # suite-internal layout

    for ti, params in enumerate(vconfig.params_list):
        blocks = []
        if "moments" in vconfig.checks:
            blocks.append(("moments", vconfig.moment_t, _stream_base("moments", ti)))
        if "mgf" in vconfig.checks:
            blocks.append(("mgf", vconfig.mgf_t, _stream_base("mgf", ti)))
        if "ks" in vconfig.checks or "total" in vconfig.checks:
            blocks.append(("ks", vconfig.ks_t, _stream_base("ks", ti)))
        for name, t, base in blocks:
            samples = collect_samples(
                params, t, vconfig.trials, vconfig.master_seed, base, vconfig.parallelism
            )
            rows = [
                (i, t, int(w), int(b), int(w + b))
                for i, (w, b) in enumerate(zip(samples.values, samples.blue_values))
            ]
            path = out / f"samples_{name}_a{params.a}_d{params.delta}_w{params.w0}.csv"
            _write_csv(path, _meta(cfg, {"seed": samples.seed, "stream_base": base}),
                       ["trial", "t", "white", "blue", "total"], rows)


def main(argv: list[str] | None = None) -> int:
    """Console entry point; returns the exit status instead of raising."""
    if argv is None:
        argv = sys.argv[1:]
    try:
        cfg = parse_config(list(argv))
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if cfg.command == "simulate":
            return _cmd_simulate(cfg, out)
        if cfg.command == "analyze":
            return _cmd_analyze(cfg, out)
        return _cmd_verify(cfg, out)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except Exception as exc:  # keep batch runs diagnosable without tracebacks
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
