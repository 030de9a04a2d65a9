"""Deterministic evaluations of ``E[X1 X2]`` that do not use the breakpoint
grid.

:func:`quad_mean_product` integrates ``chi1(u) chi2(u)`` over ``[0, 1]``
with the pointwise floor-of-log formulas

    chi1(u) = floor(ln(1-u) / ln(1-p1)),    chi2(u) = floor(ln(u) / ln(1-p2)),

on a dyadically refined partition. ``chi1`` is nondecreasing and ``chi2``
nonincreasing, so a cell on which both agree at the two ends carries a
constant product and is settled; the remaining cells are halved.

:func:`mean_product_series` sums the joint tail probabilities
``P(X1 >= i, X2 >= j)`` instead.
"""

import logging
import math
import warnings

import numpy as np

from geocorr.geom import count_powers_at_least
from geocorr.extremal.engine import nondegenerate_pair
from geocorr.oracle.sampling import Coupling


logger = logging.getLogger(__name__)

default_options = {
    "tol": 1e-10,
    "max_depth": 60,
    "initial_cells": 2**10,
    "series_eps": 1e-17,
}
"""dict: default quadrature options

The keys represent:
 * ``tol``: refinement stops once successive estimates differ by less than
   this and the unsettled cells can move the result by less than this
 * ``max_depth``: maximum number of halvings (a ``RuntimeWarning`` is issued
   when it is reached)
 * ``initial_cells``: number of equal cells of the starting partition
 * ``series_eps``: powers below this (times ``p1 p2``) end the comonotone and
   independent series
"""


def _chi(log_q1, log_q2, u):
    chi1 = np.floor(np.log1p(-u) / log_q1)
    chi2 = np.floor(np.log(u) / log_q2)
    return chi1, chi2


def quad_mean_product(p1, p2, tol=None, max_depth=None):
    """``int_0^1 chi1(u) chi2(u) du`` by adaptive cell splitting.

    Only ``[p1, 1 - p2]`` is integrated; outside of it one factor is 0.

    Returns:
        float, 0 when ``p1 + p2 >= 1``

    Raises:
        DegenerateMarginal: if either parameter equals 1
    """
    tol = tol or default_options["tol"]
    max_depth = max_depth or default_options["max_depth"]
    p1, p2 = nondegenerate_pair(p1, p2)
    if p1.p + p2.p >= 1:
        return 0.0
    log_q1, log_q2 = math.log1p(-p1.p), math.log1p(-p2.p)

    edges = np.linspace(p1.p, 1 - p2.p, default_options["initial_cells"] + 1)
    a, b = edges[:-1], edges[1:]
    settled = []
    previous = None
    for depth in range(max_depth + 1):
        chi1_a, chi2_a = _chi(log_q1, log_q2, a)
        chi1_b, chi2_b = _chi(log_q1, log_q2, b)
        mid = (a + b) / 2
        chi1_m, chi2_m = _chi(log_q1, log_q2, mid)

        flat = (chi1_a == chi1_b) & (chi2_a == chi2_b)
        # cells below float resolution cannot be split any further
        flat |= (mid <= a) | (mid >= b)
        settled.append((b[flat] - a[flat]) * chi1_m[flat] * chi2_m[flat])

        open_ = ~flat
        a, b, mid = a[open_], b[open_], mid[open_]
        widths = b - a
        estimate = math.fsum(np.concatenate(
            settled + [widths * chi1_m[open_] * chi2_m[open_]]))
        spread = math.fsum(widths * (chi1_b[open_] * chi2_a[open_]
                                     - chi1_a[open_] * chi2_b[open_]))
        logger.debug("depth %d: %d open cells, estimate %.15g, spread %.3e",
                     depth, len(a), estimate, spread)
        if not len(a) or (previous is not None
                          and abs(estimate - previous) < tol
                          and spread < tol):
            return estimate
        previous = estimate
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])

    warnings.warn(f"quadrature stopped at depth {max_depth} with "
                  f"{len(a)} open cells", RuntimeWarning)
    return estimate


def _series_length(q, eps):
    return max(count_powers_at_least(q, eps), 1)


def mean_product_series(p1, p2, coupling):
    """``E[X1 X2] = sum_{i,j >= 1} P(X1 >= i, X2 >= j)``.

    The joint tail is ``(q1^i + q2^j - 1)^+`` for the countermonotone
    coupling, ``min(q1^i, q2^j)`` for the comonotone one and
    ``q1^i q2^j`` for independent marginals. The countermonotone sum is
    finite; the others are cut where the powers fall below
    ``series_eps * p1 * p2``. The full ``i x j`` table is formed, so this is
    meant for moderate parameters.
    """
    p1, p2 = nondegenerate_pair(p1, p2)
    coupling = Coupling.parse(coupling)
    q1, q2 = p1.q, p2.q
    if coupling is Coupling.COUNTERMONOTONE:
        if p1.p + p2.p >= 1:
            return 0.0
        n1 = count_powers_at_least(q1, p2.p)
        n2 = count_powers_at_least(q2, p1.p)
    else:
        eps = default_options["series_eps"] * p1.p * p2.p
        n1, n2 = _series_length(q1, eps), _series_length(q2, eps)

    first = q1 ** np.arange(1, n1 + 1)
    second = q2 ** np.arange(1, n2 + 1)
    if coupling is Coupling.COUNTERMONOTONE:
        terms = np.clip(first[:, None] + second[None, :] - 1, 0, None)
    elif coupling is Coupling.COMONOTONE:
        terms = np.minimum(first[:, None], second[None, :])
    else:
        terms = first[:, None] * second[None, :]
    return math.fsum(terms.ravel())
