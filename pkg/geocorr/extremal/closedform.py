"""Closed form of the minimum correlation for identical marginals.

With ``q = 1 - p`` write ``alpha_i = 1 - q^i`` and ``beta_j = q^j``. By the
symmetry ``u -> 1 - u`` only ``[p, 1/2]`` has to be integrated, and with

    k   = max{i : alpha_i <= 1/2} = floor(log_q(1/2))
    c_i = max{j : beta_j >= alpha_i}      (beta_{c_i+1} < alpha_i <= beta_{c_i})

the mean product telescopes to

    E/2 = sum_{i=1}^{k-1} [c_i (q^i - 1) - q^(c_i+1)/(1-q)] + R(q, k)

where the remainder ``R`` depends on how many ``beta_j`` lie in
``[alpha_k, 1/2]`` (none, one or two, i.e. ``c_k`` in ``{k, k+1, k+2}``).
"""

import math
from dataclasses import dataclass

from geocorr.geom import as_param, count_powers_at_least
from geocorr.extremal.engine import (CorrPath, assemble,
                                          equal_breakpoint_count,
                                          nondegenerate_pair)


@dataclass(frozen=True)
class ClosedFormIndex:
    """Indices of the closed form for one ``p < 1/2``.

    Attributes:
        k (int): number of ``alpha_i`` in ``[p, 1/2]``
        c (tuple): ``c_1, ..., c_k``
        case (int): remainder case, 1, 2 or 3
    """
    k: int
    c: tuple
    case: int


def remainder_case(q, k):
    """Selects the remainder case by comparing ``alpha_k`` with
    ``beta_{k+1}`` and ``beta_{k+2}``; ties go to the lower case."""
    alpha_k = 1.0 - q ** k
    if q ** (k + 1) <= alpha_k:
        return 1
    if q ** (k + 2) <= alpha_k:
        return 2
    return 3


def closed_form_index(p):
    """Computes ``k``, the ``c_i`` and the remainder case for ``p < 1/2``."""
    p = as_param(p)
    if p.p >= 0.5:
        raise ValueError(f"the closed-form indices need p < 1/2, got {p.p!r}")
    q = p.q
    k = count_powers_at_least(q, 0.5)
    c = tuple(count_powers_at_least(q, 1.0 - q ** i) for i in range(1, k + 1))
    return ClosedFormIndex(k=k, c=c, case=remainder_case(q, k))


def beta_count_near_half(p):
    """Number of ``beta_j`` inside ``[alpha_k, 1/2]``; always 0, 1 or 2."""
    p = as_param(p)
    q = p.q
    k = count_powers_at_least(q, 0.5)
    alpha_k = 1.0 - q ** k
    return sum(1 for j in range(k + 1, k + 4) if alpha_k <= q ** j <= 0.5)


def _remainder(q, k, case):
    head = k * k / 2 + k * (q ** k - 1 + q ** (k + 1) / (1 - q))
    if case == 1:
        return head - q ** (k + 1) / (1 - q)
    if case == 2:
        return head + (q ** k - 1) - q ** (k + 2) / (1 - q)
    return head + 2 * (q ** k - 1) - q ** (k + 3) / (1 - q)


def mean_product_equal_closed(p):
    """``E[F^{-1}(U) F^{-1}(1-U)]`` for ``Geo(p)`` from the closed form."""
    p = as_param(p)
    if p.p >= 0.5:
        return 0.0
    q = p.q
    idx = closed_form_index(p)
    terms = [c_i * (q ** i - 1) - q ** (c_i + 1) / (1 - q)
             for i, c_i in enumerate(idx.c[:-1], start=1)]
    terms.append(_remainder(q, idx.k, idx.case))
    return 2 * math.fsum(terms)


def min_corr_equal_closed(p):
    """Minimum correlation of two ``Geo(p)`` variables in closed form.

    For ``p >= 1/2`` this is ``p - 1`` with ``E[X1 X2] = 0``.

    Raises:
        DegenerateMarginal: if ``p = 1``
    """
    p, _ = nondegenerate_pair(p, p)
    if p.p >= 0.5:
        return assemble(0.0, p, p, 0, CorrPath.CLOSED_FORM_HALF)
    return assemble(mean_product_equal_closed(p), p, p,
                    2 * equal_breakpoint_count(p),
                    CorrPath.CLOSED_FORM_EQUAL_P)
