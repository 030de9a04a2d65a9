"""Extremal correlations of Geometric marginals.

The package is split into:
  * ``geom``: Geometric distribution primitives
  * ``extremal``: minimum and maximum correlation engines
  * ``analytic``: closed-form bounds and derivative kinks
  * ``oracle``: Monte Carlo and quadrature cross-checks
"""

from geocorr.exceptions import BudgetExceeded, DegenerateMarginal, DomainError
from geocorr.geom import GeoParam
from geocorr.extremal import (
    CorrPath, CorrResult, max_corr, min_corr, min_corr_equal_closed,
    min_corr_exact)
from geocorr.analytic import bound_pair, enumerate_kinks


__all__ = ["BudgetExceeded", "DegenerateMarginal", "DomainError", "GeoParam",
           "CorrPath", "CorrResult", "max_corr", "min_corr",
           "min_corr_equal_closed", "min_corr_exact", "bound_pair",
           "enumerate_kinks"]
