#!/usr/bin/env python3
"""Step-doubling study of the characteristic-ODE integrator.

Prints CSV (step_count, oracle_value, abs_error, ratio_vs_previous) against
the closed-form MGF at one evaluation point. The error ratio settles near
2^4 = 16, the classical RK4 order; parameter triples with integer delta/a
up to small values can hit rounding immediately because the along-curve
solution is then polynomial.

Usage: python scripts/oracle_convergence.py [--a 2 --delta 3 --w0 2] [--t 1.0] [--u -0.5]
"""

import argparse

from cdpolya.analytics import integrate_characteristic_ode, mgf_w
from cdpolya.model import ModelParams


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=int, default=2)
    ap.add_argument("--delta", type=int, default=3)
    ap.add_argument("--w0", type=int, default=2)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--u", type=float, default=-0.5)
    args = ap.parse_args()

    params = ModelParams(args.a, args.delta, args.w0)
    reference = mgf_w(params, args.t, args.u)
    print(f"# closed form psi({args.t}, {args.u}) = {reference!r}")
    print("step_count,oracle_value,abs_error,ratio_vs_previous")
    previous = None
    for n in (2, 4, 8, 16, 32, 64, 128, 256):
        value = integrate_characteristic_ode(params, args.t, args.u, n, rel_tol=None)
        err = abs(value - reference)
        ratio = "" if previous in (None, 0.0) else repr(previous / err)
        print(f"{n},{value!r},{err!r},{ratio}")
        previous = err


if __name__ == "__main__":
    main()
