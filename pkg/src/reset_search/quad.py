"""Adaptive one-dimensional quadrature.

Finite intervals are split at the midpoint and each half is mapped through a
square-root substitution (t = a + u^2, t = b - v^2) before adaptive
refinement, which turns the half-power endpoint behavior of the first-passage
integrands into smooth integrands.  Semi-infinite Gaussian-weighted integrals
are truncated at a point where the discarded tail is provably below the
absolute tolerance.

Also provides the closed-form erfc reductions of the two inner time integrals
that appear in the periodic-reset expectations, so the nested integrals stay
O(n) instead of O(n^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, special

from .model import QuadResult


class NonConvergence(Exception):
    """Quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_evaluations: int = 10 ** 6

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_evaluations < 100:
            raise ValueError("max_evaluations must be >= 100")


DEFAULT_SETTINGS = QuadSettings()


def _quad_smooth(f, a, b, settings, budget):
    """scipy adaptive quadrature of a smooth integrand with error checking."""
    limit = max(10, int(budget // 21))
    out = integrate.quad(f, a, b, epsabs=0.5 * settings.abs_tol,
                         epsrel=settings.rel_tol, limit=limit, full_output=1)
    value, err, info = out[0], out[1], out[2]
    neval = int(info["neval"])
    if len(out) > 3:  # warning message present
        tol = max(settings.abs_tol, settings.rel_tol * abs(value))
        if err > tol:
            raise NonConvergence(
                f"quadrature error estimate {err:.3e} above tolerance {tol:.3e} "
                f"after {neval} evaluations")
    return value, err, neval


def integrate_finite(f, a: float, b: float,
                     settings: QuadSettings = DEFAULT_SETTINGS) -> QuadResult:
    """Integrate f over (a, b), tolerating power-law endpoint singularities
    with exponent > -1."""
    if not (a < b):
        raise ValueError(f"need a < b, got a={a}, b={b}")
    mid = 0.5 * (a + b)
    w = math.sqrt(mid - a)

    def left(u):
        return 2.0 * u * f(a + u * u)

    def right(v):
        return 2.0 * v * f(b - v * v)

    budget = settings.max_evaluations // 2
    v1, e1, n1 = _quad_smooth(left, 0.0, w, settings, budget)
    v2, e2, n2 = _quad_smooth(right, 0.0, w, settings, budget)
    return QuadResult(value=v1 + v2, abs_error_estimate=e1 + e2,
                      evaluations=n1 + n2)


def gaussian_truncation_point(abs_tol: float, scale: float = 1.0) -> float:
    """Upper limit x_max with x_max^2/2 = -log(abs_tol) + 3 log(x_max),
    capped at 45, then stretched by `scale` for integrands decaying like
    exp(-(x/scale)^2/2)."""
    target = -math.log(abs_tol)
    x = max(3.0, math.sqrt(2.0 * target))
    for _ in range(50):
        x_new = math.sqrt(2.0 * (target + 3.0 * math.log(x)))
        if abs(x_new - x) < 1e-12:
            x = x_new
            break
        x = x_new
    return min(x, 45.0) * scale


def integrate_semiinfinite(f, a: float,
                           settings: QuadSettings = DEFAULT_SETTINGS,
                           scale: float = 1.0) -> QuadResult:
    """Integrate a Gaussian-dominated f over (a, inf).

    `scale` widens the truncation point for integrands whose effective decay
    is exp(-(x/scale)^2/2) rather than exp(-x^2/2).
    """
    upper = gaussian_truncation_point(settings.abs_tol, scale=scale)
    if upper <= a:
        upper = a + max(1.0, abs(a))
    return integrate_finite(f, a, upper, settings)


def time_integral_32(c: float, T: float) -> float:
    """Closed form for the inner integral of t^{-3/2} e^{-c/t} over (0, T):
    sqrt(pi/c) * erfc(sqrt(c/T)), for c, T > 0."""
    if not (c > 0 and T > 0):
        raise ValueError("time_integral_32: need c > 0 and T > 0")
    return math.sqrt(math.pi / c) * special.erfc(math.sqrt(c / T))


def time_integral_12(c: float, T: float) -> float:
    """Closed form (by parts) for the inner integral of t^{-1/2} e^{-c/t}
    over (0, T): 2 sqrt(T) e^{-c/T} - 2c * time_integral_32(c, T)."""
    if not (c > 0 and T > 0):
        raise ValueError("time_integral_12: need c > 0 and T > 0")
    return 2.0 * math.sqrt(T) * math.exp(-c / T) - 2.0 * c * time_integral_32(c, T)


def time_integral_ratio(c: float, T: float) -> float:
    """time_integral_12 / time_integral_32, computed in erfcx-scaled form so
    it stays finite when erfc underflows (large c/T)."""
    if not (c > 0 and T > 0):
        raise ValueError("time_integral_ratio: need c > 0 and T > 0")
    # I12/I32 = 2 sqrt(cT/pi) / erfcx(sqrt(c/T)) - 2c
    y = math.sqrt(c / T)
    return 2.0 * math.sqrt(c * T / math.pi) / special.erfcx(y) - 2.0 * c
