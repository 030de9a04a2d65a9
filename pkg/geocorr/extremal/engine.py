"""Breakpoint enumeration for the extremal couplings.

Under the countermonotone coupling ``X1 = F1^{-1}(U)``, ``X2 = F2^{-1}(1-U)``
both variables are step functions of ``u``. ``X1`` steps up at
``alpha_i = 1 - (1-p1)^i`` and ``X2`` steps down at ``beta_j = (1-p2)^j``, so
on every interval of the merged grid the product ``X1 X2`` is constant and
``E[X1 X2]`` is a finite sum of width times label products. Only the
``alpha_i <= 1 - p2`` and ``beta_j >= p1`` matter, which gives
``d2 + d1`` breakpoints with

    d2 = floor(ln(p2) / ln(1 - p1)),    d1 = floor(ln(p1) / ln(1 - p2)).

The comonotone coupling uses the same idea in survival coordinates
``v = 1 - u``, where both variables count the powers ``(1-p_k)^i`` above
``v``; the grid is infinite there and is truncated with an explicit tail
bound.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from geocorr.exceptions import DegenerateMarginal
from geocorr.geom import as_param, moments, second_moment, count_powers_at_least


logger = logging.getLogger(__name__)

default_options = {
    "max_corr_tol": 1e-12,
    "max_corr_cap": 10**7,
}
"""dict: default truncation options for :func:`max_corr`

The keys represent:
 * ``max_corr_tol``: the comonotone sum stops once its tail bound is below
   this fraction of the running sum
 * ``max_corr_cap``: maximum number of grid points before giving up on the
   tolerance (a ``RuntimeWarning`` is issued)
"""


class CorrPath(Enum):
    """Which computation produced a :class:`CorrResult`."""
    GENERAL_ENUMERATION = "GeneralEnumeration"
    CLOSED_FORM_HALF = "ClosedFormHalf"
    CLOSED_FORM_EQUAL_P = "ClosedFormEqualP"
    EXACT_RATIONAL = "ExactRational"


@dataclass(frozen=True, eq=False)
class BreakpointGrid:
    """Merged order statistics of ``{alpha_i}`` and ``{beta_j}``.

    Attributes:
        points (np.ndarray): sorted breakpoints ``s_1 <= ... <= s_n``
        labels (np.ndarray): ``(n-1, 2)`` integer array, row ``m`` holds
            ``(f1(m), f2(m))``, the values of ``(X1, X2)`` on
            ``(s_m, s_{m+1})``
        d1 (int): number of ``beta`` points
        d2 (int): number of ``alpha`` points
    """
    points: np.ndarray
    labels: np.ndarray
    d1: int
    d2: int

    @classmethod
    def empty(cls):
        return cls(points=np.zeros(0), labels=np.zeros((0, 2), dtype=np.int64),
                   d1=0, d2=0)

    @property
    def widths(self):
        return np.diff(self.points)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class CorrResult:
    """Mean product, covariance and correlation under an extremal coupling.

    ``e_xy_exact`` and ``rho_exact`` are only set on the exact rational path
    (``rho_exact`` additionally requires ``sqrt(V1 V2)`` to be rational).
    """
    e_xy: float
    covariance: float
    rho: float
    n_breakpoints: int
    path: CorrPath
    e_xy_exact: Fraction = None
    rho_exact: Fraction = None


def nondegenerate_pair(p1, p2):
    """Validates a parameter pair for a correlation computation.

    Raises:
        DegenerateMarginal: if either parameter equals 1
    """
    p1, p2 = as_param(p1), as_param(p2)
    for name, p in (("p1", p1), ("p2", p2)):
        if p.degenerate:
            raise DegenerateMarginal(f"{name} = 1 gives a constant marginal, "
                                     "the correlation is undefined")
    return p1, p2


def breakpoint_count(p1, p2):
    """Returns ``(d1, d2)``, the number of ``beta`` and ``alpha`` points.

    Both are ``0`` when ``p1 + p2 >= 1``.
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    if p1.p + p2.p >= 1:
        return 0, 0
    d2 = count_powers_at_least(p1.q, p2.p)
    d1 = count_powers_at_least(p2.q, p1.p)
    if d1 == 0 or d2 == 0:
        return 0, 0
    return d1, d2


def equal_breakpoint_count(p):
    """``c = floor(ln p / ln(1-p))``, the number of ``alpha_i`` in
    ``[p, 1-p]`` for identical marginals (0 when ``p >= 1/2``)."""
    return breakpoint_count(p, p)[1]


def _merge_labels(points, is_first):
    """Sorts two ascending runs and labels the intervals between them.

    Returns the merged points, the number of first-run points at or below
    each interval's left end and the number of second-run points at or
    above each interval's right end.
    """
    # stable sort detects the two ascending runs and merges them in one pass
    order = np.argsort(points, kind="stable")
    points = points[order]
    is_first = is_first[order]
    below = np.cumsum(is_first)[:-1]
    above = np.cumsum(~is_first[::-1])[::-1][1:]
    return points, below, above


def breakpoints(p1, p2):
    """Builds the countermonotone breakpoint grid.

    Args:
        p1 (GeoParam or float): parameter of ``X1``, ``p1 < 1``
        p2 (GeoParam or float): parameter of ``X2``, ``p2 < 1``

    Returns:
        :class:`BreakpointGrid`, empty when ``p1 + p2 >= 1``

    Raises:
        DegenerateMarginal: if either parameter equals 1
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    d1, d2 = breakpoint_count(p1, p2)
    if not d1:
        return BreakpointGrid.empty()

    # direct powers per index, no cumulative products
    alpha = 1.0 - p1.q ** np.arange(1, d2 + 1)
    beta = p2.q ** np.arange(d1, 0, -1)
    points = np.concatenate([alpha, beta])
    is_alpha = np.concatenate([np.ones(d2, dtype=bool),
                               np.zeros(d1, dtype=bool)])
    points, f1, f2 = _merge_labels(points, is_alpha)
    labels = np.column_stack([f1, f2]).astype(np.int64)
    return BreakpointGrid(points=points, labels=labels, d1=d1, d2=d2)


def mean_product_min(p1, p2):
    """``E[X1 X2]`` under the countermonotone coupling.

    Evaluates ``sum_m (s_{m+1} - s_m) f1(m) f2(m)`` over the breakpoint
    grid; zero-width intervals from coincident breakpoints contribute 0.

    Returns:
        float, 0 when ``p1 + p2 >= 1``
    """
    grid = breakpoints(p1, p2)
    if len(grid) < 2:
        return 0.0
    return math.fsum(grid.widths * grid.labels[:, 0] * grid.labels[:, 1])


def assemble(e_xy, p1, p2, n_breakpoints, path, **exact):
    """Turns a mean product into a :class:`CorrResult`."""
    m1, m2 = moments(p1), moments(p2)
    covariance = e_xy - m1.mean * m2.mean
    rho = covariance / math.sqrt(m1.variance * m2.variance)
    return CorrResult(e_xy=e_xy, covariance=covariance, rho=rho,
                      n_breakpoints=n_breakpoints, path=path, **exact)


def min_corr(p1, p2):
    """Minimum attainable correlation between ``Geo(p1)`` and ``Geo(p2)``.

    The work is linear in ``d1 + d2`` (the breakpoint count).

    Raises:
        DegenerateMarginal: if either parameter equals 1
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    if p1.p + p2.p >= 1:
        # one of U, 1-U always falls in the zero cell
        return assemble(0.0, p1, p2, 0, CorrPath.CLOSED_FORM_HALF)
    grid = breakpoints(p1, p2)
    e_xy = 0.0
    if len(grid) >= 2:
        e_xy = math.fsum(grid.widths * grid.labels[:, 0] * grid.labels[:, 1])
    logger.debug("min_corr(%r, %r): %d breakpoints", p1.p, p2.p,
                 grid.d1 + grid.d2)
    return assemble(e_xy, p1, p2, grid.d1 + grid.d2,
                    CorrPath.GENERAL_ENUMERATION)


def _survival_grid_sum(q1, n1, q2, n2):
    """``int_{v*}^1 N1(v) N2(v) dv`` for ``N_k(v) = #{i : q_k^i > v}``.

    The grid holds ``q1^1..q1^n1`` and ``q2^1..q2^n2`` and its smallest
    point is ``v*``.
    """
    first = q1 ** np.arange(n1, 0, -1)
    second = q2 ** np.arange(n2, 0, -1)
    points = np.concatenate([first, second])
    is_first = np.concatenate([np.ones(n1, dtype=bool),
                               np.zeros(n2, dtype=bool)])
    order = np.argsort(points, kind="stable")
    points = points[order]
    is_first = is_first[order]
    # both counts run over the powers at or above each interval's right end
    n_first = np.cumsum(is_first[::-1])[::-1][1:]
    n_second = np.cumsum(~is_first[::-1])[::-1][1:]
    return math.fsum(np.diff(points) * n_first * n_second)


def _shifted_second_moment(p, n):
    """``E[(n + X)^2]`` for ``X ~ Geo(p)``."""
    return n * n + 2 * n * moments(p).mean + second_moment(p)


def mean_product_max(p1, p2, tol=None, cap=None):
    """``E[X1 X2]`` under the comonotone coupling.

    The survival-coordinate grid is truncated at ``v* = q1^n1``. Below
    ``v*`` the Cauchy-Schwarz inequality and memorylessness give the tail
    bound ``sqrt(q1^n1 E[(n1+X1)^2] q2^n2 E[(n2+X2)^2])``; ``n1`` doubles
    until the bound falls below ``tol`` times the truncated sum.

    Returns:
        tuple ``(e_xy, n_points)``
    """
    tol = default_options["max_corr_tol"] if tol is None else tol
    cap = default_options["max_corr_cap"] if cap is None else cap
    p1, p2 = nondegenerate_pair(p1, p2)
    if p1.p == p2.p:
        return second_moment(p1), 0

    n1 = max(int(math.ceil(math.log(1e-4) / math.log(p1.q))), 1)
    while True:
        v_star = p1.q ** n1
        n2 = count_powers_at_least(p2.q, v_star)
        e_xy = _survival_grid_sum(p1.q, n1, p2.q, n2)
        tail = math.sqrt(v_star * _shifted_second_moment(p1, n1)
                         * p2.q ** n2 * _shifted_second_moment(p2, n2))
        logger.debug("comonotone grid n1=%d n2=%d tail<=%.3e", n1, n2, tail)
        if tail <= tol * e_xy:
            break
        if 2 * (n1 + n2) > cap or v_star < 1e-290:
            warnings.warn(f"comonotone sum truncated at {n1 + n2} points with "
                          f"tail bound {tail:.3e}", RuntimeWarning)
            break
        n1 *= 2
    return e_xy, n1 + n2


def max_corr(p1, p2, tol=None, cap=None):
    """Maximum attainable correlation (comonotone coupling).

    Identical marginals give ``X1 = X2`` and ``rho = 1``; otherwise
    ``rho < 1``.

    Raises:
        DegenerateMarginal: if either parameter equals 1
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    e_xy, n = mean_product_max(p1, p2, tol=tol, cap=cap)
    path = (CorrPath.CLOSED_FORM_EQUAL_P if p1.p == p2.p
            else CorrPath.GENERAL_ENUMERATION)
    return assemble(e_xy, p1, p2, n, path)
