"""Geometric distribution primitives.

``X ~ Geo(p)`` counts the failures before the first success of a
Bernoulli(p) sequence, so ``P(X = i) = p(1-p)^i`` on ``{0, 1, 2, ...}``.
All functions accept either a :class:`GeoParam` or a plain probability.

The pseudoinverse follows the infimum definition
``F^{-1}(u) = inf{n : F(n) >= u}``, i.e. the level sets
``{u : F^{-1}(u) = n}`` are the right-closed intervals ``(F(n-1), F(n)]``.
"""

import math
from dataclasses import dataclass

import numpy as np

from geocorr.exceptions import DomainError


@dataclass(frozen=True)
class GeoParam:
    """A validated Geometric parameter ``0 < p <= 1``."""
    p: float

    def __post_init__(self):
        p = float(self.p)
        if not 0 < p <= 1:
            raise DomainError(f"Geometric parameter must lie in (0, 1], "
                              f"got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def q(self):
        return 1.0 - self.p

    @property
    def degenerate(self):
        """``True`` for ``p = 1``, where ``X`` is the constant 0."""
        return self.p == 1.0


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


def as_param(p):
    """Returns `p` as a :class:`GeoParam`, validating plain numbers."""
    if isinstance(p, GeoParam):
        return p
    return GeoParam(p)


def _check_index(i, name):
    if int(i) != i or i < 0:
        raise DomainError(f"{name} must be a nonnegative integer, got {i!r}")
    return int(i)


def pmf(p, i):
    """Probability mass ``p(1-p)^i``.

    Args:
        p (GeoParam or float): distribution parameter
        i (int): support point, ``i >= 0``

    Returns:
        ``P(X = i)`` as a float
    """
    p = as_param(p)
    i = _check_index(i, "i")
    return p.p * p.q ** i


def cdf(p, a):
    """Cumulative probability ``1 - (1-p)^(a+1)``.

    Evaluated as ``-expm1((a+1) log1p(-p))`` so that the small-``p`` values
    keep their relative accuracy.
    """
    p = as_param(p)
    a = _check_index(a, "a")
    if p.degenerate:
        return 1.0
    return float(-np.expm1((a + 1) * np.log1p(-p.p)))


def survival(p, a):
    """Tail probability ``P(X > a) = (1-p)^(a+1)``."""
    p = as_param(p)
    a = _check_index(a, "a")
    return p.q ** (a + 1)


def quantile(p, u):
    """Pseudoinverse ``F^{-1}(u) = min{n : F(n) >= u}``.

    The floor of ``ln(1-u)/ln(1-p)`` is only used as a starting guess; the
    answer is settled by a bracketed binary search on :func:`cdf`, so that
    ``cdf(n-1) < u <= cdf(n)`` holds for the returned ``n`` with the very
    same cdf evaluation used everywhere else.

    Args:
        p (GeoParam or float): distribution parameter
        u (float): uniform level, ``0 <= u < 1``

    Returns:
        int, the smallest support point whose cdf reaches `u`

    Raises:
        DomainError: if `u` is outside ``[0, 1)``
    """
    p = as_param(p)
    if not 0 <= u < 1:
        raise DomainError(f"quantile level must lie in [0, 1), got {u!r}")
    if p.degenerate or u <= cdf(p, 0):
        return 0

    guess = max(int(math.floor(math.log1p(-u) / math.log1p(-p.p))), 0)

    # widen the bracket until cdf(lo - 1) < u <= cdf(hi)
    width = 1
    lo = max(guess - width, 0)
    while lo > 0 and cdf(p, lo - 1) >= u:
        width *= 2
        lo = max(guess - width, 0)
    width = 1
    hi = guess + width
    while cdf(p, hi) < u:
        width *= 2
        hi = guess + width

    while lo < hi:
        mid = (lo + hi) // 2
        if cdf(p, mid) >= u:
            hi = mid
        else:
            lo = mid + 1
    return lo


def quantile_array(p, u):
    """Vectorised :func:`quantile` for an array of levels in ``[0, 1)``.

    Returns:
        ``np.ndarray`` of ``int64`` support points
    """
    p = as_param(p)
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise DomainError("quantile levels must lie in [0, 1)")
    if p.degenerate:
        return np.zeros(u.shape, dtype=np.int64)

    log_q = np.log1p(-p.p)
    n = np.floor(np.log1p(-u) / log_q)
    n = np.maximum(n, 0).astype(np.int64)

    def _cdf(k):
        return -np.expm1((k + 1) * log_q)

    # the log ratio is off by at most one step next to a level boundary
    n = np.where(_cdf(n) < u, n + 1, n)
    n = np.where((n > 0) & (_cdf(n - 1) >= u), n - 1, n)
    return n


def moments(p):
    """Mean ``(1-p)/p`` and variance ``(1-p)/p^2`` of ``Geo(p)``."""
    p = as_param(p)
    return Moments(mean=p.q / p.p, variance=p.q / p.p ** 2)


def second_moment(p):
    """``E[X^2] = (1-p)(2-p)/p^2``."""
    p = as_param(p)
    return p.q * (1 + p.q) / p.p ** 2
