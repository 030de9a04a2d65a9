import math
from fractions import Fraction


def count_powers_at_least(q, bound):
    """Largest ``n >= 0`` with ``q**n >= bound``.

    The floor of ``ln(bound)/ln(q)`` is corrected by testing the defining
    inequality with direct powers, so the count is right even when the log
    ratio lands on the wrong side of an integer. Works for floats as well as
    for ``Fraction`` arguments, in which case the comparisons are exact.

    Args:
        q (float or Fraction): ratio, ``0 <= q < 1``
        bound (float or Fraction): threshold, ``0 < bound``

    Returns:
        int count ``n``; 0 when ``q < bound``
    """
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound!r}")
    if bound > 1 or q == 0:
        return 0
    n = int(math.floor(math.log(bound) / math.log(q)))
    n = max(n, 0)
    while q ** (n + 1) >= bound:
        n += 1
    while n > 0 and q ** n < bound:
        n -= 1
    return n


def as_fraction(x):
    """Converts `x` to a ``Fraction``; strings go through ``Fraction(str)``
    so that ``"0.1"`` becomes ``1/10`` rather than the binary double."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)
