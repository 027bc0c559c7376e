"""Special functions used by the analytic formulas.

Thin wrappers with the exact contracts the rest of the library relies on:
accurate Gaussian tails without cancellation, the modified Bessel function
K0, and the closed form for K_{-1/2}.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

_SQRT2 = math.sqrt(2.0)


def gaussian_tail(x: float) -> float:
    """Upper Gaussian tail: integral of the standard normal density over (x, inf).

    Computed via erfc (erfcx-scaled for large x) so the tail keeps full
    relative accuracy instead of cancelling against 1.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("gaussian_tail: x must not be NaN")
    if x <= 0.0:
        return 0.5 * special.erfc(x / _SQRT2)
    if x < 25.0:
        return 0.5 * special.erfc(x / _SQRT2)
    # exp(-x^2/2) split in two so gradual underflow keeps a subnormal result
    # finite where the plain erfc path would flush to zero.
    half = math.exp(-0.25 * x * x)
    return 0.5 * special.erfcx(x / _SQRT2) * half * half


def gaussian_tail_scaled(x: float) -> float:
    """exp(x^2/2) * gaussian_tail(x); stable for large positive x."""
    x = float(x)
    if x <= 0.0:
        return math.exp(0.5 * x * x) * gaussian_tail(x)
    return 0.5 * special.erfcx(x / _SQRT2)


def bessel_k0(x):
    """Modified Bessel function of the second kind, order zero, for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0) or np.any(~np.isfinite(x)):
        raise ValueError("bessel_k0: x must be positive and finite")
    out = special.k0(x)
    return float(out) if out.ndim == 0 else out


def bessel_k0_scaled(x):
    """exp(x) * K0(x); avoids underflow of K0 for large x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0) or np.any(~np.isfinite(x)):
        raise ValueError("bessel_k0_scaled: x must be positive and finite")
    out = special.k0e(x)
    return float(out) if out.ndim == 0 else out


def bessel_k_minus_half(y: float) -> float:
    """K_{-1/2}(y) = sqrt(pi/(2y)) * exp(-y), y > 0 (exact closed form)."""
    y = float(y)
    if not (y > 0 and math.isfinite(y)):
        raise ValueError(f"bessel_k_minus_half: y must be positive, got {y}")
    return math.sqrt(math.pi / (2.0 * y)) * math.exp(-y)
