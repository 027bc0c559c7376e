"""Expected-hitting-time formulas for all covered (dimension, mechanism) pairs.

Fixed-target expectations are closed forms (plus erfc-reduced time integrals
for the periodic mechanism).  Gaussian-target expectations are computed in
dimensionless variables (s, script_T) and rescaled by sigma^2/D (d = 1, 2) or
sigma^3/D (d = 3) on output; for d >= 2 they are the detection-radius-scaled
limits: eps0 * E in 3D and E / |log eps0| in 2D.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import quad
from .model import (BridgeReset, ExpectedTime, GaussianTarget, PeriodicReset,
                    PoissonianReset, SearchSpec, UnsupportedCombination,
                    to_dimensionless)
from .specfun import bessel_k0_scaled, gaussian_tail, gaussian_tail_scaled

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Divergence thresholds in dimensionless period script_T.
BRIDGE_DIVERGENCE = 4.0
PERIODIC_DIVERGENCE = 1.0
_DIVERGENCE_GUARD = 1e-9


@dataclass(frozen=True)
class FixedTargetQuery:
    spec: SearchSpec
    a: tuple

    def __post_init__(self):
        pt = tuple(float(c) for c in np.atleast_1d(self.a))
        if len(pt) != self.spec.dimension:
            raise ValueError(
                f"target point has {len(pt)} coordinates for dimension {self.spec.dimension}")
        object.__setattr__(self, "a", pt)
        if self.spec.dimension >= 2:
            if math.hypot(*pt) <= self.spec.detection_radius:
                raise ValueError(
                    "fixed target must lie outside the detection ball (else tau = 0)")


@dataclass(frozen=True)
class GaussQuery:
    spec: SearchSpec
    sigma2: float

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")


def _check_positive(**params):
    for name, v in params.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be positive, got {v}")


def _radius(a) -> float:
    return float(np.linalg.norm(np.atleast_1d(np.asarray(a, dtype=float))))


# --- fixed targets, Poissonian ------------------------------------------------

def poisson_fixed_1d(r: float, D: float, a: float) -> ExpectedTime:
    """Expected hitting time of level a under Poissonian resetting, d = 1."""
    _check_positive(r=r, D=D)
    return ExpectedTime.finite(math.expm1(math.sqrt(2.0 * r / D) * abs(a)) / r)


def poisson_fixed_2d(r: float, D: float, a, eps0: float) -> ExpectedTime:
    """Expected detection time of the eps0-ball around a, Poissonian, d = 2."""
    _check_positive(r=r, D=D, eps0=eps0)
    rho = _radius(a)
    if rho <= eps0:
        raise ValueError(f"need |a| > eps0, got |a|={rho}, eps0={eps0}")
    z0 = math.sqrt(r / D) * eps0
    za = math.sqrt(r / D) * rho
    # K0(z0)/K0(za) in scaled form; the exponential factor carries the growth.
    ratio = math.exp(za - z0) * bessel_k0_scaled(z0) / bessel_k0_scaled(za)
    return ExpectedTime.finite((ratio - 1.0) / r)


def poisson_fixed_3d(r: float, D: float, a, eps0: float) -> ExpectedTime:
    """Expected detection time of the eps0-ball around a, Poissonian, d = 3."""
    _check_positive(r=r, D=D, eps0=eps0)
    rho = _radius(a)
    if rho <= eps0:
        raise ValueError(f"need |a| > eps0, got |a|={rho}, eps0={eps0}")
    val = ((rho / eps0) * math.exp(math.sqrt(r / D) * (rho - eps0)) - 1.0) / r
    return ExpectedTime.finite(val)


# --- first-passage densities --------------------------------------------------

def fpt_density_1d(t: float, a: float, D: float) -> float:
    """Density of the hitting time of level a for free Brownian motion, d = 1."""
    _check_positive(t=t, D=D)
    if a == 0:
        raise ValueError("fpt_density_1d: need a != 0")
    return abs(a) * math.exp(-a * a / (2.0 * D * t)) / (_SQRT_2PI * math.sqrt(D) * t ** 1.5)


def bridge_fpt_subdensity_1d(t: float, a: float, D: float, T: float) -> float:
    """Sub-density of the hitting time of level a within one bridge segment."""
    _check_positive(D=D, T=T)
    if not (0.0 < t < T):
        raise ValueError(f"need 0 < t < T, got t={t}, T={T}")
    if a == 0:
        raise ValueError("bridge_fpt_subdensity_1d: need a != 0")
    frac = 1.0 - t / T
    num = abs(a) * math.exp(-a * a / (2.0 * D * t * frac))
    return num / (math.sqrt(2.0 * math.pi * D * frac) * t ** 1.5)


def fpt_subdensity_3d(t: float, a, eps0: float, D: float) -> float:
    """Sub-density of the detection time of the eps0-ball for free BM, d = 3.

    Total mass over (0, inf) is eps0/|a| (3D Brownian motion is transient).
    """
    _check_positive(t=t, D=D, eps0=eps0)
    rho = _radius(a)
    if rho <= eps0:
        raise ValueError(f"need |a| > eps0, got |a|={rho}, eps0={eps0}")
    b = rho - eps0
    return (eps0 / rho) * b * math.exp(-b * b / (2.0 * D * t)) / (
        _SQRT_2PI * math.sqrt(D) * t ** 1.5)


# --- fixed targets, bridge ------------------------------------------------------

def bridge_crossing_prob(T: float, D: float, a: float) -> float:
    """Probability that one bridge segment of length T reaches level a."""
    _check_positive(T=T, D=D)
    return math.exp(-2.0 * a * a / (D * T))


def bridge_fixed_1d(T: float, D: float, a: float) -> ExpectedTime:
    """Expected hitting time of level a under bridge resetting, d = 1.

    Finite for every finite a and T; the exp(2a^2/DT) growth factors are
    folded into the scaled Gaussian tail for stability.
    """
    _check_positive(T=T, D=D)
    if a == 0:
        return ExpectedTime.finite(0.0)
    g = 2.0 * a * a / (D * T)
    first = T * math.expm1(g)
    # 2|a| e^g / D * int_{|a|}^inf e^{-2x^2/(TD)} dx, with the integral written
    # as a Gaussian tail at 2|a|/sqrt(TD); e^g cancels into the scaled tail.
    z = 2.0 * abs(a) / math.sqrt(T * D)
    second = abs(a) * math.sqrt(2.0 * math.pi * T / D) * gaussian_tail_scaled(z)
    return ExpectedTime.finite(first + second)


def bridge_fixed_3d_bounds(T: float, D: float, a, eps0: float):
    """Upper/lower sandwich for the bridge expectation in d = 3 (no exact
    closed form exists at finite eps0)."""
    _check_positive(T=T, D=D, eps0=eps0)
    rho = _radius(a)
    if rho <= eps0:
        raise ValueError(f"need |a| > eps0, got |a|={rho}, eps0={eps0}")
    plus, minus = rho + eps0, rho - eps0
    upper = T * ((plus / minus) * (rho / (2.0 * eps0))
                 * math.exp(2.0 * plus * plus / (D * T)) - 1.0) \
        + T * plus / (2.0 * minus) * math.exp(8.0 * rho * eps0 / (D * T))
    lower = T * ((rho / (2.0 * eps0)) * math.exp(2.0 * minus * minus / (D * T)) - 1.0) \
        + T * minus / (2.0 * plus) * math.exp(-8.0 * rho * eps0 / (D * T))
    return ExpectedTime.finite(lower), ExpectedTime.finite(upper)


# --- fixed targets, periodic ----------------------------------------------------

def periodic_fixed_1d(T: float, D: float, a: float) -> ExpectedTime:
    """Expected hitting time of level a under periodic resetting, d = 1."""
    _check_positive(T=T, D=D)
    if a == 0:
        raise ValueError("periodic_fixed_1d: formula degenerates at a = 0 (tau = 0)")
    c = a * a / (2.0 * D)
    p = (abs(a) / math.sqrt(2.0 * math.pi * D)) * quad.time_integral_32(c, T)
    return ExpectedTime.finite(T * (1.0 / p - 1.0) + quad.time_integral_ratio(c, T))


def periodic_fixed_3d(T: float, D: float, a, eps0: float) -> ExpectedTime:
    """Expected detection time of the eps0-ball under periodic resetting, d = 3."""
    _check_positive(T=T, D=D, eps0=eps0)
    rho = _radius(a)
    if rho <= eps0:
        raise ValueError(f"need |a| > eps0, got |a|={rho}, eps0={eps0}")
    b = rho - eps0
    c = b * b / (2.0 * D)
    p = (eps0 * b / (rho * math.sqrt(2.0 * math.pi * D))) * quad.time_integral_32(c, T)
    return ExpectedTime.finite(T * (1.0 / p - 1.0) + quad.time_integral_ratio(c, T))


# --- Gaussian targets, dimensionless forms --------------------------------------

def gauss_poisson_1d(s: float) -> float:
    """Gaussian-target expectation, Poissonian, d = 1, in units sigma^2/D."""
    _check_positive(s=s)
    return (2.0 * math.exp(s) * gaussian_tail(-math.sqrt(2.0 * s)) - 1.0) / s


def gauss_bridge_1d(script_T: float) -> ExpectedTime:
    """Gaussian-target expectation, bridge, d = 1, in units sigma^2/D."""
    _check_positive(script_T=script_T)
    if script_T <= BRIDGE_DIVERGENCE + _DIVERGENCE_GUARD:
        return ExpectedTime.divergent()
    t = script_T
    return ExpectedTime.finite(
        t * math.sqrt(t / (t - 4.0)) - t + t / (2.0 + math.sqrt(t)))


def gauss_periodic_1d(script_T: float,
                      settings: quad.QuadSettings = quad.DEFAULT_SETTINGS) -> ExpectedTime:
    """Gaussian-target expectation, periodic, d = 1, in units sigma^2/D."""
    _check_positive(script_T=script_T)
    if script_T <= PERIODIC_DIVERGENCE + _DIVERGENCE_GUARD:
        return ExpectedTime.divergent()
    t = script_T
    # Residence term: ratio of the two inner time integrals, Gaussian weight.
    def f_ratio(x):
        if x <= 0.0:
            return 0.0
        return quad.time_integral_ratio(0.5 * x * x, t) * math.exp(-0.5 * x * x)

    term1 = (2.0 / _SQRT_2PI) * quad.integrate_semiinfinite(f_ratio, 0.0, settings).value

    # Cycle-count term: 1/p with p = erfc(x / sqrt(2T)), erfcx-scaled so the
    # reciprocal stays finite; net decay rate is (1 - 1/T) x^2 / 2.
    rate = 1.0 - 1.0 / t

    def f_cycles(x):
        if x <= 0.0:
            return 1.0 / _SQRT_2PI  # erfc(0) = 1 limit
        return math.exp(-0.5 * rate * x * x) / (
            _SQRT_2PI * special.erfcx(x / math.sqrt(2.0 * t)))

    term2 = 2.0 * t * quad.integrate_semiinfinite(
        f_cycles, 0.0, settings, scale=1.0 / math.sqrt(rate)).value
    return ExpectedTime.finite(term1 + term2 - t)


def gauss_poisson_3d(s: float,
                     settings: quad.QuadSettings = quad.DEFAULT_SETTINGS) -> float:
    """Gaussian-target expectation (eps0-scaled limit), Poissonian, d = 3,
    in units sigma^3/D."""
    _check_positive(s=s)
    root = math.sqrt(s)

    # x^3 e^{sqrt(s) x - x^2/2} with the square completed: e^{s/2} (y+sqrt(s))^3
    # e^{-y^2/2}, so the truncation rule for Gaussian weights applies.
    def g(y):
        u = y + root
        return u * u * u * math.exp(-0.5 * y * y)

    integral = quad.integrate_semiinfinite(g, -root, settings).value
    return (2.0 / (_SQRT_2PI * s)) * math.exp(0.5 * s) * integral


def gauss_bridge_3d(script_T: float) -> ExpectedTime:
    """Gaussian-target expectation (eps0-scaled limit), bridge, d = 3,
    in units sigma^3/D."""
    _check_positive(script_T=script_T)
    if script_T <= BRIDGE_DIVERGENCE + _DIVERGENCE_GUARD:
        return ExpectedTime.divergent()
    t = script_T
    return ExpectedTime.finite(2.0 * t ** 3 / (_SQRT_2PI * (t - 4.0) ** 2))


def gauss_periodic_3d(script_T: float,
                      settings: quad.QuadSettings = quad.DEFAULT_SETTINGS) -> ExpectedTime:
    """Gaussian-target expectation (eps0-scaled limit), periodic, d = 3,
    in units sigma^3/D."""
    _check_positive(script_T=script_T)
    if script_T <= PERIODIC_DIVERGENCE + _DIVERGENCE_GUARD:
        return ExpectedTime.divergent()
    t = script_T
    rate = 1.0 - 1.0 / t

    # Inner time integral reduces to sqrt(2 pi)/x * erfc(x / sqrt(2T)).
    def f(x):
        if x <= 0.0:
            return 0.0
        return x ** 3 * math.exp(-0.5 * rate * x * x) / (
            _SQRT_2PI * special.erfcx(x / math.sqrt(2.0 * t)))

    val = 2.0 * t * quad.integrate_semiinfinite(
        f, 0.0, settings, scale=1.0 / math.sqrt(rate)).value
    return ExpectedTime.finite(val)


def gauss_poisson_2d(s: float,
                     settings: quad.QuadSettings = quad.DEFAULT_SETTINGS) -> float:
    """Gaussian-target expectation (log-eps0-scaled limit), Poissonian, d = 2,
    in units sigma^2/D."""
    _check_positive(s=s)
    root = math.sqrt(s)

    # 1/K0 written with the scaled Bessel function; the e^{sqrt(s) x} growth
    # shifts the Gaussian peak to x = sqrt(s), so extend the truncation point.
    def f(x):
        if x <= 0.0:
            return 0.0  # 1/K0 -> 0 like -1/log at the origin
        return x * math.exp(root * x - 0.5 * x * x) / bessel_k0_scaled(root * x)

    upper = root + quad.gaussian_truncation_point(settings.abs_tol)
    return quad.integrate_finite(f, 0.0, upper, settings).value / s


# --- dispatch --------------------------------------------------------------------

def units_label(dimension: int) -> str:
    return "sigma3_over_D" if dimension == 3 else "sigma2_over_D"


def eps0_scaling_label(dimension: int) -> str | None:
    if dimension == 2:
        return "limit of E/|log(eps0)| as eps0 -> 0"
    if dimension == 3:
        return "limit of eps0*E as eps0 -> 0"
    return None


def gauss_dimensionless(dimension: int, mechanism_kind: type, x: float):
    """Evaluate the dimensionless Gaussian-target expectation for a covered
    (dimension, mechanism) pair; returns ExpectedTime."""
    table = {
        (1, PoissonianReset): lambda v: ExpectedTime.finite(gauss_poisson_1d(v)),
        (1, BridgeReset): gauss_bridge_1d,
        (1, PeriodicReset): gauss_periodic_1d,
        (2, PoissonianReset): lambda v: ExpectedTime.finite(gauss_poisson_2d(v)),
        (3, PoissonianReset): lambda v: ExpectedTime.finite(gauss_poisson_3d(v)),
        (3, BridgeReset): gauss_bridge_3d,
        (3, PeriodicReset): gauss_periodic_3d,
    }
    key = (dimension, mechanism_kind)
    if key not in table:
        raise UnsupportedCombination(
            f"no Gaussian-target formula for dimension {dimension} with "
            f"{mechanism_kind.__name__}")
    return table[key](x)


def gauss_expected_time(q: GaussQuery) -> ExpectedTime:
    """Gaussian-target expectation for a full query, rescaled to output units.

    d = 1: absolute time.  d = 2: E/|log eps0| limit, units sigma^2/D scaled
    to time.  d = 3: eps0*E limit, units sigma^3/D (time * length).
    """
    spec = q.spec
    dp = to_dimensionless(spec, q.sigma2)
    x = dp.s if dp.s is not None else dp.script_T
    result = gauss_dimensionless(spec.dimension, type(spec.mechanism), x)
    if result.is_divergent:
        return result
    sigma = math.sqrt(q.sigma2)
    unit = sigma ** 3 / spec.diffusion if spec.dimension == 3 \
        else q.sigma2 / spec.diffusion
    return ExpectedTime.finite(result.unwrap() * unit)


def fixed_expected_time(q: FixedTargetQuery) -> ExpectedTime:
    """Fixed-target expectation dispatch (absolute time units).

    The 3D bridge case has only a bounds sandwich; use bridge_fixed_3d_bounds.
    """
    spec = q.spec
    m = spec.mechanism
    d = spec.dimension
    if d == 1:
        a = q.a[0]
        if isinstance(m, PoissonianReset):
            return poisson_fixed_1d(m.rate, spec.diffusion, a)
        if isinstance(m, PeriodicReset):
            return periodic_fixed_1d(m.period, spec.diffusion, a)
        return bridge_fixed_1d(m.period, spec.diffusion, a)
    if d == 2:
        return poisson_fixed_2d(m.rate, spec.diffusion, q.a, spec.detection_radius)
    if isinstance(m, PoissonianReset):
        return poisson_fixed_3d(m.rate, spec.diffusion, q.a, spec.detection_radius)
    if isinstance(m, PeriodicReset):
        return periodic_fixed_3d(m.period, spec.diffusion, q.a, spec.detection_radius)
    raise UnsupportedCombination(
        "3D bridge fixed-target expectation is only available as bounds; "
        "use bridge_fixed_3d_bounds")
