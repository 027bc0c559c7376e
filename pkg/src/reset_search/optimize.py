"""Derivative-free scalar minimization over the dimensionless rate/period.

Coarse log-spaced grid bracketing followed by golden-section refinement;
divergent objective values are treated as +inf by the search.  Reproduces
the seven optimal constants of the Gaussian-target expectations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .model import ExpectedTime

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi


class NoFiniteValue(Exception):
    """Objective is divergent on the entire probe set."""


class BracketTooNarrow(Exception):
    """Invalid bracket: lo >= hi."""


@dataclass(frozen=True)
class Optimum:
    argmin: float
    min_value: float
    x_tolerance: float
    function_evaluations: int


def _as_float(y) -> float:
    if isinstance(y, ExpectedTime):
        return y.as_float()
    return float(y)


def minimize_scalar(f, bracket, x_tol: float = 1e-6, n_grid: int = 64) -> Optimum:
    """Minimize f on (lo, hi): 64 log-spaced probes, then golden section.

    f may return floats or ExpectedTime (Divergent counted as +inf).
    Deterministic for given inputs.
    """
    lo, hi = bracket
    if not (lo < hi):
        raise BracketTooNarrow(f"need lo < hi, got ({lo}, {hi})")
    if lo <= 0:
        raise BracketTooNarrow("bracket must be strictly positive (log-spaced probes)")

    evals = 0

    def fv(x):
        nonlocal evals
        evals += 1
        return _as_float(f(x))

    grid = np.geomspace(lo, hi, n_grid)
    values = [fv(x) for x in grid]
    best = int(np.argmin(values))
    if not math.isfinite(values[best]):
        raise NoFiniteValue("objective is divergent/non-finite on the entire probe set")

    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, n_grid - 1)]

    # Golden-section refinement on [a, b].
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = fv(x1), fv(x2)
    while b - a > x_tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = fv(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = fv(x2)
    argmin = 0.5 * (a + b)
    min_value = fv(argmin)
    return Optimum(argmin=float(argmin), min_value=min_value,
                   x_tolerance=x_tol, function_evaluations=evals)


def check_unimodal(f, bracket, n_grid: int = 200) -> bool:
    """Probe f on a log grid and report whether the finite part shows a single
    sign change of the discrete slope (empirical unimodality diagnostic)."""
    lo, hi = bracket
    grid = np.geomspace(lo, hi, n_grid)
    vals = np.array([_as_float(f(x)) for x in grid])
    finite = np.isfinite(vals)
    v = vals[finite]
    if v.size < 3:
        return False
    slopes = np.sign(np.diff(v))
    slopes = slopes[slopes != 0]
    changes = int(np.sum(np.diff(slopes) != 0))
    return changes == 1


@dataclass(frozen=True)
class OptimumRow:
    """One optimal constant: our computed optimum plus the published 3-4
    significant-figure values it is compared against."""
    theorem: int
    mechanism: str
    dimension: int
    optimum: Optimum
    reported_argmin: float
    reported_min: float


# Published dimensionless optima (argmin, min) the table is checked against.
REPORTED_OPTIMA = {
    1: ("poisson", 1, 0.491, 3.548),
    2: ("bridge", 1, 10.136, 4.847),
    3: ("periodic", 1, 2.82, 3.35),
    4: ("poisson", 3, 0.738, 13.09),
    5: ("bridge", 3, 12.00, 21.54),
    6: ("periodic", 3, 4.13, 22.775),
    7: ("poisson", 2, 0.713, 4.77),
}

# Search brackets excluding the divergence regions.
BRACKETS = {
    1: (1e-3, 20.0),
    2: (4.0 + 1e-6, 100.0),
    3: (1.0 + 1e-2, 60.0),
    4: (1e-3, 20.0),
    5: (4.0 + 1e-6, 100.0),
    6: (1.0 + 1e-2, 60.0),
    7: (1e-2, 20.0),
}

OBJECTIVES = {
    1: analytic.gauss_poisson_1d,
    2: analytic.gauss_bridge_1d,
    3: analytic.gauss_periodic_1d,
    4: analytic.gauss_poisson_3d,
    5: analytic.gauss_bridge_3d,
    6: analytic.gauss_periodic_3d,
    7: analytic.gauss_poisson_2d,
}


def optimal_constants(x_tol: float = 1e-6) -> list[OptimumRow]:
    """Minimize all seven Gaussian-target objectives; one row per theorem."""
    rows = []
    for tid in sorted(OBJECTIVES):
        mech, dim, ref_arg, ref_min = REPORTED_OPTIMA[tid]
        opt = minimize_scalar(OBJECTIVES[tid], BRACKETS[tid], x_tol=x_tol)
        rows.append(OptimumRow(theorem=tid, mechanism=mech, dimension=dim,
                               optimum=opt, reported_argmin=ref_arg,
                               reported_min=ref_min))
    return rows
