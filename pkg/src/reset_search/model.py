"""Shared parameter and result types for the reset-search library.

All types are immutable values and safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class UnsupportedCombination(Exception):
    """(dimension, mechanism) pair has no covered expectation formula."""


# --- reset mechanisms -------------------------------------------------------

@dataclass(frozen=True)
class PoissonianReset:
    """Instantaneous jump back to the origin at exponential(rate) times."""
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"reset rate must be positive, got {self.rate}")


@dataclass(frozen=True)
class PeriodicReset:
    """Instantaneous jump back to the origin every `period` time units."""
    period: float

    def __post_init__(self):
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError(f"reset period must be positive, got {self.period}")


@dataclass(frozen=True)
class BridgeReset:
    """Continuous return to the origin: consecutive bridges of length `period`."""
    period: float

    def __post_init__(self):
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError(f"bridge period must be positive, got {self.period}")


Mechanism = Union[PoissonianReset, PeriodicReset, BridgeReset]


@dataclass(frozen=True)
class SearchSpec:
    """Full model configuration for one search process.

    detection_radius (eps0) is only meaningful for dimension >= 2, where a
    point target is detected on entering the ball of that radius around it.
    """
    dimension: int
    diffusion: float
    mechanism: Mechanism
    detection_radius: float | None = None

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not (self.diffusion > 0 and math.isfinite(self.diffusion)):
            raise ValueError(f"diffusion coefficient must be positive, got {self.diffusion}")
        if not isinstance(self.mechanism, (PoissonianReset, PeriodicReset, BridgeReset)):
            raise TypeError(f"unknown mechanism: {self.mechanism!r}")
        if self.dimension == 2 and not isinstance(self.mechanism, PoissonianReset):
            raise UnsupportedCombination(
                "dimension 2 supports only the Poissonian reset mechanism")
        if self.dimension >= 2:
            eps0 = self.detection_radius
            if eps0 is None or not (eps0 > 0 and math.isfinite(eps0)):
                raise ValueError(
                    f"detection_radius must be positive for dimension >= 2, got {eps0}")


# --- targets ----------------------------------------------------------------

@dataclass(frozen=True)
class FixedTarget:
    """Target at a fixed point; stored as a tuple of length = dimension."""
    point: tuple

    def __post_init__(self):
        pt = tuple(float(c) for c in np.atleast_1d(self.point))
        object.__setattr__(self, "point", pt)

    @property
    def radius(self) -> float:
        return math.hypot(*self.point)


@dataclass(frozen=True)
class GaussianTarget:
    """Centered Gaussian target with per-coordinate variance sigma2."""
    sigma2: float

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"target variance must be positive, got {self.sigma2}")


TargetSpec = Union[FixedTarget, GaussianTarget]


# --- dimensionless parameters -----------------------------------------------

@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless rate s (r = (D/sigma^2) s) or period script_T (T = (sigma^2/D) script_T).

    Exactly one of the two fields is set, according to the mechanism.
    """
    s: float | None = None
    script_T: float | None = None

    def __post_init__(self):
        if (self.s is None) == (self.script_T is None):
            raise ValueError("exactly one of s, script_T must be set")
        val = self.s if self.s is not None else self.script_T
        if not (val > 0 and math.isfinite(val)):
            raise ValueError(f"dimensionless parameter must be positive, got {val}")


def to_dimensionless(spec: SearchSpec, sigma2: float) -> DimensionlessParams:
    """Map (rate or period, D, sigma2) to the dimensionless (s, script_T)."""
    if not (sigma2 > 0 and math.isfinite(sigma2)):
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    D = spec.diffusion
    m = spec.mechanism
    if isinstance(m, PoissonianReset):
        return DimensionlessParams(s=m.rate * sigma2 / D)
    return DimensionlessParams(script_T=m.period * D / sigma2)


def from_dimensionless(params: DimensionlessParams, diffusion: float, sigma2: float) -> float:
    """Inverse of to_dimensionless: recover the dimensional rate or period."""
    if params.s is not None:
        return params.s * diffusion / sigma2
    return params.script_T * sigma2 / diffusion


# --- results ----------------------------------------------------------------

@dataclass(frozen=True)
class ExpectedTime:
    """Expected search time: a finite nonnegative value, or Divergent.

    Divergent is produced exactly on the analytic divergence branches
    (script_T <= 4 for the 1D/3D bridge, script_T <= 1 for the periodic
    mechanism), never as a numeric overflow artifact.
    """
    value: float | None

    @classmethod
    def finite(cls, value: float) -> "ExpectedTime":
        v = float(value)
        if not (v >= 0 and math.isfinite(v)):
            raise ValueError(f"finite expected time must be nonnegative, got {value}")
        return cls(v)

    @classmethod
    def divergent(cls) -> "ExpectedTime":
        return cls(None)

    @property
    def is_divergent(self) -> bool:
        return self.value is None

    def as_float(self) -> float:
        """The value, with Divergent mapped to +inf (for minimization)."""
        return math.inf if self.value is None else self.value

    def unwrap(self) -> float:
        if self.value is None:
            raise ValueError("expected time is divergent")
        return self.value


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0:
            raise ValueError("abs_error_estimate must be nonnegative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo summary. censored_fraction counts replicates truncated at
    the reset-count cap; those contribute their censoring time, biasing the
    mean downward."""
    mean: float
    std_error: float
    n: int
    censored_fraction: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (self.mean >= 0):
            raise ValueError("mean must be nonnegative")
        if not (self.std_error >= 0):
            raise ValueError("std_error must be nonnegative")
        if not (0.0 <= self.censored_fraction <= 1.0):
            raise ValueError("censored_fraction must be in [0, 1]")
