"""Package containing the analytic side of the minimum correlation.

  * ``bounds``: the upper bound ``g``, the two-sided bound pair and the
    envelope of ``-p/ln(1-p)``
  * ``kinks``: roots of ``x^i (1 + x^c) = 1`` and the numerical slope-jump
    witness
"""

from geocorr.analytic.bounds import (
    EXPONENTIAL_MIN_CORR, LOG_PRODUCT_INTEGRAL, BoundPair, bound_pair,
    log_envelope, neg_p_over_log, upper_bound_g)
from geocorr.analytic.kinks import (
    KinkPoint, enumerate_kinks, kink_root, one_sided_slopes, slope_jump,
    slope_noise)


__all__ = ["EXPONENTIAL_MIN_CORR", "LOG_PRODUCT_INTEGRAL", "BoundPair",
           "bound_pair", "log_envelope", "neg_p_over_log", "upper_bound_g",
           "KinkPoint", "enumerate_kinks", "kink_root", "one_sided_slopes",
           "slope_jump", "slope_noise"]
