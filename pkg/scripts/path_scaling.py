#!/usr/bin/env python3
"""Per-path behavior of the scaled white count.

The distributional limit of W(t)/t says nothing about individual paths; this
dump makes the path-level wobble visible. Each trajectory is observed at a
geometric time grid and printed as CSV (path, t, w_over_t) for plotting.
No claims are asserted here; it is evidence collection only.

Usage: python scripts/path_scaling.py [--paths 8] [--t-max 2000] [--seed 2]
"""

import argparse

from cdpolya.model import ModelParams
from cdpolya.simulate import RandomSource, simulate_snapshots


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=8)
    ap.add_argument("--t-max", type=float, default=2000.0)
    ap.add_argument("--points", type=int, default=40)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--a", type=int, default=1)
    ap.add_argument("--delta", type=int, default=1)
    ap.add_argument("--w0", type=int, default=0)
    args = ap.parse_args()

    params = ModelParams(args.a, args.delta, args.w0)
    ratio = args.t_max ** (1.0 / (args.points - 1))
    times = [ratio**k for k in range(args.points)]
    print("path,t,w_over_t")
    for i in range(args.paths):
        states = simulate_snapshots(params, times, RandomSource(args.seed, i))
        for t, st in zip(times, states):
            print(f"{i},{t!r},{st.white / t!r}")


if __name__ == "__main__":
    main()
