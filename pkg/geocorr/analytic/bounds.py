"""Closed-form bounds on the minimum correlation.

Replacing ``floor(ab)`` by ``ab`` in the integral for ``E[X1 X2]`` turns it
into ``int_0^1 ln(u) ln(1-u) du / (ln q1 ln q2) = (2 - pi^2/6)/(ln q1 ln q2)``
and yields the upper bound

    g(p1, p2) = [p1/ln q1][p2/ln q2] / sqrt(q1 q2) * (2 - pi^2/6) - sqrt(q1 q2).

Adding independent exponentials conditioned on ``[0, 1]`` turns each
geometric into an exponential, whose minimum correlation is ``1 - pi^2/6``
for any rates; since those additions have mean at most ``1/2`` the same
``g`` shifted down gives a lower bound.
"""

import math
from dataclasses import dataclass

from geocorr.exceptions import DomainError
from geocorr.geom import as_param
from geocorr.extremal.engine import nondegenerate_pair


EXPONENTIAL_MIN_CORR = 1 - math.pi ** 2 / 6
"""float: minimum correlation between two exponential variables, any rates"""

LOG_PRODUCT_INTEGRAL = 2 - math.pi ** 2 / 6
"""float: ``int_0^1 ln(u) ln(1-u) du``"""


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower!r} exceeds upper "
                             f"bound {self.upper!r}")

    def contains(self, value, slack=0.0):
        return self.lower - slack <= value <= self.upper + slack

    @property
    def gap(self):
        return self.upper - self.lower


def neg_p_over_log(p):
    """``-p / ln(1-p)``, which tends to 1 as ``p -> 0``."""
    p = as_param(p)
    return -p.p / math.log1p(-p.p)


def upper_bound_g(p1, p2):
    """The upper bound ``g(p1, p2)`` on the minimum correlation.

    Raises:
        DegenerateMarginal: if either parameter equals 1
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    root = math.sqrt(p1.q * p2.q)
    ratio = (p1.p / math.log1p(-p1.p)) * (p2.p / math.log1p(-p2.p))
    return ratio / root * LOG_PRODUCT_INTEGRAL - root


def bound_pair(p1, p2):
    """Lower and upper bound on ``rho_-(p1, p2)``.

    The lower bound is

        g - sqrt(q1/q2) p2 / 2 - sqrt(q2/q1) p1 / 2 - p1 p2 / (4 sqrt(q1 q2)),

    the last term coming from the product of the two exponential means.
    For ``p1 = p2 = p`` it reduces to ``g(p) - p - p^2 / (4 q)``.

    Returns:
        :class:`BoundPair`
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    g = upper_bound_g(p1, p2)
    lower = (g - 0.5 * math.sqrt(p1.q / p2.q) * p2.p
             - 0.5 * math.sqrt(p2.q / p1.q) * p1.p
             - 0.25 * p1.p * p2.p / math.sqrt(p1.q * p2.q))
    return BoundPair(lower=lower, upper=g)


def log_envelope(p):
    """Linear and quadratic envelope of ``-p/ln(1-p)`` on ``(0, 1/2]``.

    The lower line is the chord through ``(0, 1)`` and
    ``(1/2, 1/(2 ln 2))``, so it touches the function at ``p = 1/2``.

    Raises:
        DomainError: if ``p > 1/2``
    """
    p = as_param(p)
    if p.p > 0.5:
        raise DomainError(f"the envelope holds for p in (0, 1/2], "
                          f"got {p.p!r}")
    lower = 1 - (2 - 1 / math.log(2)) * p.p
    upper = 1 - p.p / 2 - p.p ** 2 / 12
    return BoundPair(lower=lower, upper=upper)
