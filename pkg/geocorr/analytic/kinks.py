"""Parameters where the derivative of ``rho_-(p, p)`` jumps.

For identical marginals a breakpoint ``alpha_i = 1 - x^i`` meets a
breakpoint ``beta_j = x^j`` (``x = 1 - p``) exactly when
``x^i + x^j = 1``. Writing ``j = i + c`` the root of ``x^i (1 + x^c) = 1``
is ``(1/2)^(1/i)`` for ``c = 0`` and lies strictly inside
``((1/2)^(1/i), (1/2)^(1/(i+c)))`` otherwise, so every family of kinks
sits next to ``1 - (1/2)^(1/i)``.
"""

import logging
import warnings
from dataclasses import dataclass

from geocorr.exceptions import DomainError
from geocorr.geom import count_powers_at_least
from geocorr.extremal import min_corr


logger = logging.getLogger(__name__)

default_options = {
    "iterations": 60,
    "residual_tol": 1e-14,
    "dedup_tol": 1e-12,
    "h": 1e-7,
    "noise_offset": 0.01,
}
"""dict: default root-finding and finite-difference options

The keys represent:
 * ``iterations``: maximum number of bisection steps
 * ``residual_tol``: accepted ``|x^i + x^(i+c) - 1|``
 * ``dedup_tol``: roots closer than this (in ``x``) are merged
 * ``h``: finite-difference step for the one-sided slopes
 * ``noise_offset``: distance of the reference points used to measure the
   slope noise
"""


@dataclass(frozen=True)
class KinkPoint:
    """A root ``x`` of ``x^i (1 + x^c) = 1`` and its parameter ``p = 1 - x``.
    """
    i: int
    c: int
    x: float
    p: float

    @property
    def residual(self):
        return self.x ** self.i + self.x ** (self.i + self.c) - 1

    @property
    def bracket(self):
        """Interval known to contain ``x`` (degenerate for ``c = 0``)."""
        return 0.5 ** (1 / self.i), 0.5 ** (1 / (self.i + self.c))


def _kink_residual(x, i, c):
    return x ** i + x ** (i + c) - 1


def kink_root(i, c, iterations=None, residual_tol=None):
    """Solves ``x^i (1 + x^c) = 1`` on ``(0, 1)``.

    Args:
        i (int): power of the ``alpha`` side, ``i >= 1``
        c (int): index offset of the ``beta`` side, ``c >= 0``

    Returns:
        :class:`KinkPoint`
    """
    iterations = iterations or default_options["iterations"]
    residual_tol = residual_tol or default_options["residual_tol"]
    if int(i) != i or i < 1 or int(c) != c or c < 0:
        raise DomainError(f"need integers i >= 1 and c >= 0, got ({i}, {c})")
    i, c = int(i), int(c)

    if c == 0:
        x = 0.5 ** (1 / i)
        return KinkPoint(i=i, c=c, x=x, p=1 - x)

    # f < 0 at the lower end and f > 0 at the upper end of the bracket
    lo, hi = 0.5 ** (1 / i), 0.5 ** (1 / (i + c))
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            break
        if _kink_residual(mid, i, c) < 0:
            lo = mid
        else:
            hi = mid
    x = min((lo, hi), key=lambda v: abs(_kink_residual(v, i, c)))
    if abs(_kink_residual(x, i, c)) > residual_tol:
        warnings.warn(f"kink root ({i}, {c}) has residual "
                      f"{_kink_residual(x, i, c):.3e}", RuntimeWarning)
    return KinkPoint(i=i, c=c, x=x, p=1 - x)


def enumerate_kinks(p_min, dedup_tol=None):
    """All kinks of ``rho_-(p, p)`` with ``p >= p_min``.

    ``i`` runs up to the last root of 1/2 above `p_min`; for each ``i`` the
    offset ``c`` grows until the root drops below `p_min` (the root moves
    towards ``x = 1`` as ``c`` grows).

    Returns:
        list of :class:`KinkPoint` sorted by decreasing ``p``
    """
    dedup_tol = dedup_tol or default_options["dedup_tol"]
    if not 0 < p_min <= 0.5:
        raise DomainError(f"p_min must lie in (0, 1/2], got {p_min!r}")
    i_max = count_powers_at_least(1 - p_min, 0.5)

    found = []
    for i in range(1, i_max + 1):
        c = 0
        while True:
            kink = kink_root(i, c)
            if kink.p < p_min:
                break
            found.append(kink)
            c += 1

    found.sort(key=lambda k: (-k.p, k.i, k.c))
    kinks = []
    for kink in found:
        if kinks and abs(kinks[-1].x - kink.x) <= dedup_tol:
            continue
        kinks.append(kink)
    logger.info("%d kinks with p >= %g", len(kinks), p_min)
    return kinks


def _rho(p):
    return min_corr(p, p).rho


def one_sided_slopes(p, h=None):
    """Backward and forward difference quotients of ``rho_-(p, p)``."""
    h = h or default_options["h"]
    centre = _rho(p)
    return (centre - _rho(p - h)) / h, (_rho(p + h) - centre) / h


def slope_jump(p, h=None):
    """Forward minus backward slope; of order one at a kink, ``O(h)``
    elsewhere."""
    left, right = one_sided_slopes(p, h)
    return right - left


def slope_noise(p, h=None, offset=None):
    """Largest ``|slope_jump|`` at ``p - offset`` and ``p + offset``."""
    offset = offset or default_options["noise_offset"]
    refs = [r for r in (p - offset, p + offset) if 0 < r - 1e-6 and r < 1]
    return max(abs(slope_jump(r, h)) for r in refs)
