"""Package containing the Geometric distribution primitives.

The exported functions are:
  * ``pmf``, ``cdf``, ``survival``: mass, distribution and tail functions
  * ``quantile``, ``quantile_array``: the pseudoinverse (scalar, vectorised)
  * ``moments``, ``second_moment``: mean/variance and ``E[X^2]``
"""

from geocorr.geom.core import *
from geocorr.geom.helpers import count_powers_at_least, as_fraction


__all__ = ["GeoParam", "Moments", "as_param", "pmf", "cdf", "survival",
           "quantile", "quantile_array", "moments", "second_moment",
           "count_powers_at_least", "as_fraction"]
