"""Closed-form analytics of the constant-differential urn process.

Everything here is a pure function of ``ModelParams`` and real arguments:

* the moment generating function of the white count,
  psi(t, u) = E[exp(u W(t))]
            = (1 + at - at e^{au})^{-delta/a}
              * ((at e^{au} - at - e^{au}) / (at e^{au} - at - 1))^{w0/a},
  finite for u < u*(t) = (1/a) log(1 + 1/(at));
* exact moments derived from psi (mean, second moment, variance);
* the characteristic curves of the transport PDE that psi solves, plus a
  fixed-step RK4 integrator of the along-characteristic ODE that serves as
  an independent numeric oracle for the closed form;
* finite-difference residuals of the transport PDE itself;
* the Gamma(delta/a, a^2) law that W(t)/t converges to, with CDF/MGF/PPF
  in the shape-scale convention mgf(x) = (1 - scale*x)^(-shape);
* the nilpotent martingale transform (I - tB) X(t) and the L1 deviation
  bound for |W(t)/t - a*delta|.

Derivative identities worth knowing when reading the code: the variance
returned by :func:`var_w` is ``a^2 t (2 w0 + delta + a delta t)``, which is
what differentiating psi twice at u = 0 yields (and what simulation
reproduces); it equals ``second_moment_w - mean_w**2`` identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ModelParams, UrnState
from .special import regularized_gamma_p, regularized_gamma_p_inverse

# evaluations with a structural denominator smaller than this are rejected
# rather than returned with silent precision loss
_BOUNDARY_GUARD = 1e-12


class OutOfDomain(ValueError):
    """Evaluation point is at or beyond a domain boundary."""


class StepCountTooSmall(RuntimeError):
    """Step-halving error estimate exceeded the requested tolerance."""


# ---------------------------------------------------------------------------
# moment generating function and moments


def mgf_domain_bound(params: ModelParams, t: float) -> float:
    """Supremum u*(t) of the u-domain of psi(t, .); infinite at t = 0."""
    if t < 0.0:
        raise OutOfDomain(f"t must be >= 0, got {t}")
    if t == 0.0:
        return math.inf
    a = params.a
    return math.log(1.0 + 1.0 / (a * t)) / a


def mgf_w(params: ModelParams, t: float, u: float) -> float:
    """Closed-form psi(t, u) = E[exp(u W(t))].

    Requires u < u*(t); raises OutOfDomain at or beyond the boundary, where
    the MGF diverges.
    """
    if t < 0.0:
        raise OutOfDomain(f"t must be >= 0, got {t}")
    if t == 0.0:
        return math.exp(u * params.w0)
    a = params.a
    eu = math.exp(a * u)
    g = a * t * (eu - 1.0)
    base = 1.0 - g  # = 1 + at - at e^{au}, must stay positive
    if base < _BOUNDARY_GUARD:
        raise OutOfDomain(
            f"u={u} is at or beyond the domain boundary "
            f"u*={mgf_domain_bound(params, t):.6g} at t={t}"
        )
    ratio = (g - eu) / (g - 1.0)
    return base ** (-params.delta / a) * ratio ** (params.w0 / a)


def mean_w(params: ModelParams, t: float) -> float:
    """E[W(t)] = w0 + a*delta*t."""
    return params.w0 + params.a * params.delta * t


def second_moment_w(params: ModelParams, t: float) -> float:
    """E[W(t)^2] = w0^2 + (2a^2 t + 2 a t delta) w0 + a^2 t delta (at + t delta + 1)."""
    a, d, w0 = params.a, params.delta, params.w0
    return w0 * w0 + (2 * a * a * t + 2 * a * t * d) * w0 + a * a * t * d * (a * t + t * d + 1)


def var_w(params: ModelParams, t: float) -> float:
    """Var[W(t)] = a^2 t (2 w0 + delta + a delta t).

    Equal to second_moment_w - mean_w**2 by construction; the 2*w0 term is
    forced by the second moment (and confirmed by simulation).
    """
    a, d, w0 = params.a, params.delta, params.w0
    return a * a * t * (2 * w0 + d + a * d * t)


def mean_vector(params: ModelParams, t: float) -> tuple[float, float]:
    """(E[W(t)], E[B(t)]); components differ by exactly delta."""
    m = mean_w(params, t)
    return (m, m + params.delta)


# ---------------------------------------------------------------------------
# characteristic curves and the independent ODE oracle


def characteristic_curve(params: ModelParams, t: float, u: float, s: float) -> float:
    """The characteristic through (t, u) of the transport PDE, evaluated at s.

    C(s) = (1/a) log[(a(s-t)e^{au} - a(s-t) + e^{au}) / (a(s-t)e^{au} - a(s-t) + 1)],
    so C(t) = u, and C satisfies the autonomous ODE
    C'(s) = 2 - e^{-aC(s)} - e^{aC(s)}.
    """
    a = params.a
    eu = math.exp(a * u)
    k = a * (s - t) * (eu - 1.0)
    num = k + eu
    den = k + 1.0
    if den < _BOUNDARY_GUARD:
        raise OutOfDomain(f"characteristic through (t={t}, u={u}) leaves its domain at s={s}")
    if num <= 0.0:
        raise OutOfDomain(f"characteristic through (t={t}, u={u}) leaves its domain at s={s}")
    return math.log(num / den) / a


def characteristic_intercept(params: ModelParams, t: float, u: float) -> float:
    """C(0), the time-axis intercept used as the along-curve initial condition."""
    return characteristic_curve(params, t, u, 0.0)


@dataclass(frozen=True)
class CharacteristicCurve:
    """The characteristic through the terminal point (t, u), as a callable of s."""

    params: ModelParams
    t: float
    u: float

    def __call__(self, s: float) -> float:
        return characteristic_curve(self.params, self.t, self.u, s)

    @property
    def intercept(self) -> float:
        return self(0.0)


def integrate_characteristic_ode(
    params: ModelParams,
    t: float,
    u: float,
    step_count: int,
    rel_tol: float | None = 1e-8,
) -> float:
    """Numerically recover psi(t, u) by integrating along the characteristic.

    Solves v'(s) = -delta (1 - e^{aC(s)}) v(s) from v(0) = exp(w0 * C(0)) to
    s = t with classical fixed-step RK4, once with ``step_count`` steps and
    once with double that. Returns the finer result; raises StepCountTooSmall
    if the step-doubling error estimate |v_2n - v_n| / 15 exceeds ``rel_tol``
    relative to the result (pass ``rel_tol=None`` to skip the check, e.g. in
    convergence-order studies).

    This is the independent cross-check for :func:`mgf_w`: it never evaluates
    the closed-form psi, only the characteristic geometry.
    """
    if step_count < 1:
        raise ValueError(f"step_count must be >= 1, got {step_count}")
    if t < 0.0:
        raise OutOfDomain(f"t must be >= 0, got {t}")
    a, d, w0 = params.a, params.delta, params.w0
    eu = math.exp(a * u)
    if t > 0.0 and 1.0 - a * t * (eu - 1.0) < _BOUNDARY_GUARD:
        raise OutOfDomain(f"(t={t}, u={u}) outside the MGF domain")

    v0 = math.exp(w0 * characteristic_intercept(params, t, u))

    # along the curve, e^{aC(s)} = (k + eu)/(k + 1) with k = a(s-t)(eu - 1),
    # so the ODE coefficient is -delta (1 - eu)/(k + 1)
    coef = -d * (1.0 - eu)

    def deriv(s: float, v: float) -> float:
        return coef / (a * (s - t) * (eu - 1.0) + 1.0) * v

    def rk4(n: int) -> float:
        h = t / n
        v = v0
        s = 0.0
        for i in range(n):
            s = i * h
            k1 = deriv(s, v)
            k2 = deriv(s + 0.5 * h, v + 0.5 * h * k1)
            k3 = deriv(s + 0.5 * h, v + 0.5 * h * k2)
            k4 = deriv(s + h, v + h * k3)
            v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return v

    coarse = rk4(step_count)
    fine = rk4(2 * step_count)
    if rel_tol is not None:
        err = abs(fine - coarse) / 15.0
        if err > rel_tol * max(abs(fine), 1e-300):
            raise StepCountTooSmall(
                f"step-doubling estimate {err:.3g} exceeds rel_tol={rel_tol:.3g} "
                f"at step_count={step_count}; increase step_count"
            )
    return fine


# ---------------------------------------------------------------------------
# transport-PDE residuals (finite differences of the closed form)


def pde_residual(params: ModelParams, t: float, u: float, h: float) -> float:
    """Residual of psi_t + (2 - e^{-au} - e^{au}) psi_u + delta (1 - e^{au}) psi.

    Partials are central differences of :func:`mgf_w` with step ``h``, so the
    residual of the exact solution decays as O(h^2). Requires t - h > 0 and
    (t +- h, u +- h) inside the MGF domain.
    """
    if t - h <= 0.0:
        raise OutOfDomain(f"need t - h > 0, got t={t}, h={h}")
    a, d = params.a, params.delta
    psi = mgf_w(params, t, u)
    dpsi_dt = (mgf_w(params, t + h, u) - mgf_w(params, t - h, u)) / (2.0 * h)
    dpsi_du = (mgf_w(params, t, u + h) - mgf_w(params, t, u - h)) / (2.0 * h)
    eau = math.exp(a * u)
    return dpsi_dt + (2.0 - math.exp(-a * u) - eau) * dpsi_du + d * (1.0 - eau) * psi


def pde_residual_bivariate(params: ModelParams, t: float, u: float, h: float) -> float:
    """Residual of the two-variable transport PDE restricted to v = 0.

    The joint MGF phi(t, u, v) = E[exp(u W + v B)] satisfies
    phi_t + (1 - e^{-au-av}) phi_u + (1 - e^{au+av}) phi_v = 0, and at v = 0
    the constant differential gives phi_v = psi_u + delta psi. Substituting
    yields a residual that is algebraically identical to :func:`pde_residual`
    (terms associate differently, so they match to rounding, not bit for bit).
    """
    if t - h <= 0.0:
        raise OutOfDomain(f"need t - h > 0, got t={t}, h={h}")
    a, d = params.a, params.delta
    psi = mgf_w(params, t, u)
    dpsi_dt = (mgf_w(params, t + h, u) - mgf_w(params, t - h, u)) / (2.0 * h)
    dpsi_du = (mgf_w(params, t, u + h) - mgf_w(params, t, u - h)) / (2.0 * h)
    dphi_dv = dpsi_du + d * psi
    return dpsi_dt + (1.0 - math.exp(-a * u)) * dpsi_du + (1.0 - math.exp(a * u)) * dphi_dv


# ---------------------------------------------------------------------------
# the gamma limit law


@dataclass(frozen=True)
class GammaLaw:
    """Gamma distribution in the shape/scale convention, mgf(x) = (1 - scale*x)^(-shape)."""

    shape: float
    scale: float

    @property
    def mean(self) -> float:
        return self.shape * self.scale


def limit_law(params: ModelParams) -> GammaLaw:
    """The Gamma(delta/a, a^2) law of the scaled white count W(t)/t as t -> infinity.

    Its mean, a*delta, matches lim mean_w(params, t)/t.
    """
    return GammaLaw(shape=params.delta / params.a, scale=float(params.a * params.a))


def gamma_mgf(law: GammaLaw, x: float) -> float:
    """(1 - scale*x)^(-shape), finite for x < 1/scale."""
    base = 1.0 - law.scale * x
    if base < _BOUNDARY_GUARD:
        raise OutOfDomain(f"gamma MGF requires x < 1/scale = {1.0 / law.scale:.6g}, got {x}")
    return base**-law.shape


def gamma_cdf(law: GammaLaw, x: float) -> float:
    """Regularized lower incomplete gamma at x/scale; 0 for x <= 0."""
    if x <= 0.0:
        return 0.0
    return regularized_gamma_p(law.shape, x / law.scale)


def gamma_ppf(law: GammaLaw, p: float) -> float:
    """Quantile function, the inverse of :func:`gamma_cdf` on [0, 1)."""
    return law.scale * regularized_gamma_p_inverse(law.shape, p)


# ---------------------------------------------------------------------------
# martingale transform and L1 bound


@dataclass(frozen=True)
class MartingaleTransform:
    """The one-parameter family M(t) = I - tB with B = [[-a, -a], [a, a]]^T.

    B is nilpotent (B^2 = 0), so exp(-tB) = I - tB exactly and the family is
    additive: M(s) + M(t) - I = M(s + t), and M(t) M(-t) = I.
    """

    a: int

    def matrix(self, t: float) -> tuple[tuple[float, float], tuple[float, float]]:
        at = self.a * t
        return ((1.0 + at, -at), (at, 1.0 - at))


def martingale_transform(params: ModelParams, t: float, state: UrnState) -> tuple[float, float]:
    """Apply (I - tB) to the count vector (white, blue).

    Both components come out shifted by the same a*delta*t, so the process
    (W(t) - a*delta*t, B(t) - a*delta*t) has constant conditional expectation.
    """
    (m00, m01), (m10, m11) = MartingaleTransform(params.a).matrix(t)
    w, b = float(state.white), float(state.blue)
    return (m00 * w + m01 * b, m10 * w + m11 * b)


def l1_bound(params: ModelParams, t: float) -> float:
    """Upper bound sqrt(a^3 delta + a^2 (w0 + delta)/t) + w0/t on E|W(t)/t - a*delta|.

    Decreasing in t, with limit sqrt(a^3 delta).
    """
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    a, d, w0 = params.a, params.delta, params.w0
    return math.sqrt(a**3 * d + a * a * (w0 + d) / t) + w0 / t


# ---------------------------------------------------------------------------
# grid evaluation (plot-ready closed form vs oracle comparison)


def mgf_grid(
    params: ModelParams,
    t_values: list[float],
    u_values: list[float] | None = None,
    step_count: int = 4000,
) -> list[tuple[float, float, float, float, float]]:
    """Rows (t, u, psi_closed_form, psi_ode_oracle, abs_diff) over a (t, u) grid.

    When ``u_values`` is None, each t gets the default grid
    {-2, -1, -0.5, -0.1, 0, 0.5*u*(t)}, which spans deep-negative u through
    half way to the domain boundary.
    """
    rows = []
    for t in t_values:
        if u_values is None:
            us = [-2.0, -1.0, -0.5, -0.1, 0.0]
            if t > 0.0:
                us.append(0.5 * mgf_domain_bound(params, t))
        else:
            us = list(u_values)
        for u in us:
            closed = mgf_w(params, t, u)
            oracle = integrate_characteristic_ode(params, t, u, step_count)
            rows.append((t, u, closed, oracle, abs(closed - oracle)))
    return rows
