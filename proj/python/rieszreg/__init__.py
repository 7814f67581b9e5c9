"""Riesz representer regression.

Representer fits over Bregman-divergence losses with branch links, debiased
estimators (dm/ipw/aipw/tmle) with optional cross-fitting, covariate-balance
diagnostics, nearest-neighbor matching, and the Monte Carlo benchmark. All
heavy lifting happens in the compiled core; configuration uses the same JSON
schema as the command line tool (see the README).
"""

from ._core import (
    ConfigError,
    DataError,
    FitDomainError,
    benchmark,
    estimate,
    fit,
    nn_matching_ate,
    synthetic,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "FitDomainError",
    "benchmark",
    "estimate",
    "fit",
    "nn_matching_ate",
    "synthetic",
    "verify",
    "__version__",
]
