"""Expected search times for diffusion with stochastic resetting.

Three reset mechanisms (Poissonian, periodic, Brownian bridge), fixed or
Gaussian-distributed targets, dimensions 1-3.  Closed forms and quadrature
in :mod:`reset_search.analytic`, optimal reset parameters in
:mod:`reset_search.optimize`, Monte Carlo verification in
:mod:`reset_search.mc`.
"""

from .model import (BridgeReset, DimensionlessParams, ExpectedTime,
                    FixedTarget, GaussianTarget, McEstimate, PeriodicReset,
                    PoissonianReset, QuadResult, SearchSpec,
                    UnsupportedCombination, from_dimensionless,
                    to_dimensionless)

__version__ = "0.1.0"

__all__ = [
    "BridgeReset",
    "DimensionlessParams",
    "ExpectedTime",
    "FixedTarget",
    "GaussianTarget",
    "McEstimate",
    "PeriodicReset",
    "PoissonianReset",
    "QuadResult",
    "SearchSpec",
    "UnsupportedCombination",
    "from_dimensionless",
    "to_dimensionless",
    "__version__",
]
