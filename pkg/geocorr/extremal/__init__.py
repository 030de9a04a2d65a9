"""Package containing the extremal correlation engines.

  * ``engine``: the linear-time breakpoint enumeration for the minimum
    correlation and its comonotone counterpart for the maximum
  * ``closedform``: the telescoped closed form for identical marginals
  * ``exact``: the same interval sum in exact rational arithmetic
"""

from geocorr.extremal.engine import (
    BreakpointGrid, CorrPath, CorrResult, breakpoint_count, breakpoints,
    equal_breakpoint_count, max_corr, mean_product_max, mean_product_min,
    min_corr)
from geocorr.extremal.closedform import (
    ClosedFormIndex, closed_form_index, beta_count_near_half,
    mean_product_equal_closed, min_corr_equal_closed)
from geocorr.extremal.exact import (
    RationalProb, grid_denominator, mean_product_min_exact, min_corr_exact,
    std_product_exact)


__all__ = ["BreakpointGrid", "CorrPath", "CorrResult", "breakpoint_count",
           "breakpoints", "equal_breakpoint_count", "max_corr",
           "mean_product_max", "mean_product_min", "min_corr",
           "ClosedFormIndex", "closed_form_index", "beta_count_near_half",
           "mean_product_equal_closed", "min_corr_equal_closed",
           "RationalProb", "grid_denominator", "mean_product_min_exact",
           "min_corr_exact", "std_product_exact"]
