"""Package containing the independent verification oracles.

  * ``sampling``: coupled inverse-transform sampling, Monte Carlo
    correlation estimates and the exponential lift
  * ``quadrature``: step-function quadrature and the joint-tail series for
    ``E[X1 X2]``
"""

from geocorr.oracle.sampling import (
    Coupling, McEstimate, correlation_estimate, exponential_lift,
    lifted_mc_corr, mc_corr, mc_mean_product, sample_pair, sample_pairs)
from geocorr.oracle.quadrature import mean_product_series, quad_mean_product


__all__ = ["Coupling", "McEstimate", "correlation_estimate",
           "exponential_lift", "lifted_mc_corr", "mc_corr", "mc_mean_product",
           "sample_pair", "sample_pairs", "mean_product_series",
           "quad_mean_product"]
