"""Inner event loop of the urn simulator, in two bit-identical flavors.

Both implementations consume uniforms from a numpy Generator in the same
order (one for the wait, one for the color, per drawn epoch) and perform the
same IEEE double operations, so for a given generator state they produce the
same trajectory, leave the generator in the same state, and can be swapped
freely. The numba version exists purely for throughput; the pure-Python
version is the readable reference and the fallback when numba is absent.

The loop carries a "pending" epoch across calls: the first epoch drawn beyond
the horizon is kept (time and color) so that advancing in segments visits
exactly the states of a single longer run. ``pend_white`` is -1 when no epoch
is pending, else 1 for white and 0 for blue.

Counts abort at 2**62 so every derived 64-bit quantity (including the total)
stays exact; status 1 reports the would-overflow condition, status 0 is
normal completion. Invariant violations (differential drift, off-lattice
white count, negative count) are counted per event and reported, never
silently repaired.
"""

from __future__ import annotations

import math

COUNT_CAP = 1 << 62

STATUS_OK = 0
STATUS_OVERFLOW = 1


def _advance_py(gen, w, b, t_now, pend_t, pend_white, a, delta, horizon):
    violations = 0
    if pend_white >= 0:
        if pend_t > horizon:
            return w, b, t_now, pend_t, pend_white, violations, STATUS_OK
        if pend_white == 1:
            w -= a
            b -= a
        else:
            if b > COUNT_CAP - a:
                return w, b, t_now, pend_t, pend_white, violations, STATUS_OVERFLOW
            w += a
            b += a
        t_now = pend_t
        pend_white = -1
        if b - w != delta or w % a != 0 or w < 0 or w + b != 2 * w + delta:
            violations += 1
    while True:
        rate = float(w) + float(b)
        u1 = gen.random()
        wait = -math.log1p(-u1) / rate
        te = t_now + wait
        u2 = gen.random()
        is_white = 1 if u2 < w / rate else 0
        if te > horizon:
            return w, b, t_now, te, is_white, violations, STATUS_OK
        if is_white == 1:
            w -= a
            b -= a
        else:
            if b > COUNT_CAP - a:
                return w, b, t_now, te, is_white, violations, STATUS_OVERFLOW
            w += a
            b += a
        t_now = te
        if b - w != delta or w % a != 0 or w < 0 or w + b != 2 * w + delta:
            violations += 1


try:
    from numba import njit

    advance = njit(nogil=True, cache=True)(_advance_py)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    advance = _advance_py
    HAVE_NUMBA = False
