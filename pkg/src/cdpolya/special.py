"""Regularized lower incomplete gamma function and its inverse.

P(s, x) = integral_0^x e^{-t} t^{s-1} dt / Gamma(s), evaluated by the power
series for x < s + 1 and by a modified-Lentz continued fraction for the
complement otherwise. Both iterations run to machine precision; the absolute
error of the returned value is below 1e-12 over the desk-scale domain.
"""

from __future__ import annotations

import math

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAX_ITER = 600

# documented accuracy contract of regularized_gamma_p
ABS_TOL = 1e-12


def regularized_gamma_p(shape: float, x: float) -> float:
    """Regularized lower incomplete gamma P(shape, x) for shape > 0."""
    if shape <= 0.0:
        raise ValueError(f"shape must be positive, got {shape}")
    if x <= 0.0:
        return 0.0
    if x < shape + 1.0:
        return _p_series(shape, x)
    return 1.0 - _q_continued_fraction(shape, x)


def _p_series(shape: float, x: float) -> float:
    # P(s,x) = x^s e^{-x} / Gamma(s+1) * sum_{n>=0} x^n / ((s+1)...(s+n))
    term = 1.0 / shape
    total = term
    denom = shape
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + shape * math.log(x) - math.lgamma(shape))
    raise RuntimeError(f"series for P({shape}, {x}) did not converge")


def _q_continued_fraction(shape: float, x: float) -> float:
    # Q(s,x) via Lentz's algorithm on the standard continued fraction.
    b = x + 1.0 - shape
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - shape)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x + shape * math.log(x) - math.lgamma(shape))
    raise RuntimeError(f"continued fraction for Q({shape}, {x}) did not converge")


def regularized_gamma_p_inverse(shape: float, p: float) -> float:
    """Smallest x with P(shape, x) >= p, by bracket expansion and bisection."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must be in [0, 1), got {p}")
    if p == 0.0:
        return 0.0
    lo, hi = 0.0, max(shape, 1.0)
    while regularized_gamma_p(shape, hi) < p:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("inverse bracket expansion failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if regularized_gamma_p(shape, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
