"""Exact rational evaluation of the countermonotone mean product.

For rational ``p1`` and ``p2`` every breakpoint ``1 - q1^i`` and ``q2^j`` is
rational, so the interval sum can be carried out without rounding. This
gives an independent check on the floating-point engine.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from geocorr.exceptions import BudgetExceeded, DegenerateMarginal, DomainError
from geocorr.geom import as_fraction, count_powers_at_least
from geocorr.extremal.engine import CorrPath, CorrResult


logger = logging.getLogger(__name__)

default_options = {
    "bit_budget": 4096,
}
"""dict: ``bit_budget`` caps the bit length of the largest breakpoint
denominator"""


@dataclass(frozen=True)
class RationalProb:
    """A probability ``0 < value <= 1`` held as a reduced fraction."""
    value: Fraction

    def __post_init__(self):
        value = as_fraction(self.value)
        if not 0 < value <= 1:
            raise DomainError(f"probability must lie in (0, 1], "
                              f"got {self.value!r}")
        object.__setattr__(self, "value", value)

    @classmethod
    def parse(cls, text):
        """Accepts ``"1/4"``, ``"0.25"`` or ``"1"``."""
        try:
            return cls(Fraction(text.strip()))
        except (ValueError, ZeroDivisionError) as err:
            raise DomainError(f"not a rational literal: {text!r}") from err

    @property
    def numerator(self):
        return self.value.numerator

    @property
    def denominator(self):
        return self.value.denominator

    def __float__(self):
        return float(self.value)


def as_rational(p):
    if isinstance(p, RationalProb):
        return p
    return RationalProb(p)


def _check_pair(p1, p2):
    p1, p2 = as_rational(p1), as_rational(p2)
    for name, p in (("p1", p1), ("p2", p2)):
        if p.value == 1:
            raise DegenerateMarginal(f"{name} = 1 gives a constant marginal")
    return p1.value, p2.value


def _exact_count(q, bound, budget):
    """``count_powers_at_least`` with the bit budget checked up front."""
    estimate = int(math.log(bound) / math.log(q)) + 1
    bits = estimate * q.denominator.bit_length()
    if bits > budget:
        raise BudgetExceeded(f"breakpoint denominators need about {bits} "
                             f"bits, budget is {budget}")
    return count_powers_at_least(q, bound)


def exact_counts(p1, p2, bit_budget=None):
    """Exact ``(d1, d2)``; ``(0, 0)`` when ``p1 + p2 >= 1``."""
    budget = default_options["bit_budget"] if bit_budget is None \
        else bit_budget
    p1, p2 = _check_pair(p1, p2)
    if p1 + p2 >= 1:
        return 0, 0
    d2 = _exact_count(1 - p1, p2, budget)
    d1 = _exact_count(1 - p2, p1, budget)
    return d1, d2


def grid_denominator(p1, p2, bit_budget=None):
    """Least common denominator of all breakpoints (1 for an empty grid)."""
    d1, d2 = exact_counts(p1, p2, bit_budget)
    if not d1:
        return 1
    p1, p2 = _check_pair(p1, p2)
    return math.lcm((1 - p1).denominator ** d2, (1 - p2).denominator ** d1)


def mean_product_min_exact(p1, p2, bit_budget=None):
    """Exact ``E[X1 X2]`` under the countermonotone coupling.

    Args:
        p1 (RationalProb, Fraction or str): parameter of ``X1``
        p2 (RationalProb, Fraction or str): parameter of ``X2``
        bit_budget (int): overrides ``default_options["bit_budget"]``

    Returns:
        ``Fraction``; ``0`` when ``p1 + p2 >= 1``

    Raises:
        BudgetExceeded: if the breakpoint denominators would be too large
    """
    d1, d2 = exact_counts(p1, p2, bit_budget)
    if not d1:
        return Fraction(0)
    p1, p2 = _check_pair(p1, p2)
    q1, q2 = 1 - p1, 1 - p2
    alphas = ((1 - q1 ** i, True) for i in range(1, d2 + 1))
    betas = ((q2 ** j, False) for j in range(d1, 0, -1))

    total = Fraction(0)
    f1, f2 = 0, d1
    previous = None
    for point, is_alpha in heapq.merge(alphas, betas):
        if previous is not None:
            total += (point - previous) * f1 * f2
        if is_alpha:
            f1 += 1
        else:
            f2 -= 1
        previous = point
    logger.debug("exact grid with %d points, denominator %d bits",
                 d1 + d2, grid_denominator(p1, p2, bit_budget).bit_length())
    return total


def _rational_sqrt(x):
    """Square root of a nonnegative ``Fraction`` if it is rational."""
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num == x.numerator and den * den == x.denominator:
        return Fraction(num, den)
    return None


def std_product_exact(p1, p2):
    """``sqrt(V1 V2) = sqrt(q1 q2) / (p1 p2)`` as a ``Fraction``, or ``None``
    when it is irrational."""
    p1, p2 = _check_pair(p1, p2)
    root = _rational_sqrt((1 - p1) * (1 - p2))
    if root is None:
        return None
    return root / (p1 * p2)


def min_corr_exact(p1, p2, bit_budget=None):
    """Minimum correlation with the mean product computed exactly.

    ``rho_exact`` is set when ``sqrt(V1 V2)`` is rational, which holds for
    instance for identical marginals.
    """
    e_xy = mean_product_min_exact(p1, p2, bit_budget)
    d1, d2 = exact_counts(p1, p2, bit_budget)
    scale = std_product_exact(p1, p2)
    p1, p2 = _check_pair(p1, p2)
    q1, q2 = 1 - p1, 1 - p2
    covariance = e_xy - (q1 / p1) * (q2 / p2)
    if scale is not None:
        rho_exact = covariance / scale
        rho = float(rho_exact)
    else:
        rho_exact = None
        rho = float(covariance) * float(p1 * p2) / math.sqrt(q1 * q2)
    return CorrResult(e_xy=float(e_xy), covariance=float(covariance),
                      rho=rho, n_breakpoints=d1 + d2,
                      path=CorrPath.EXACT_RATIONAL, e_xy_exact=e_xy,
                      rho_exact=rho_exact)
