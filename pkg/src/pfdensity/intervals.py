"""Certified evaluation of transcendental expressions.

Every value here is an mpmath interval converted to a pair of exact
``Fraction`` endpoints, so comparisons against exact rationals never round.
Precision is escalated until the question asked (a floor, a sign) is decided.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from typing import Callable

from mpmath import iv

PRECISIONS = (64, 128, 256, 512, 1024, 2048, 4096)


class AmbiguousFloorError(ArithmeticError):
    """Raised when an interval cannot be narrowed enough to decide a floor."""


@contextmanager
def _ivprec(bits: int):
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    man = int(man)
    if man == 0:
        return Fraction(0)
    val = Fraction(man) * (Fraction(2) ** exp)
    return -val if sign else val


def endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an mpmath interval."""
    a, b = x._mpi_
    return _raw_to_fraction(a), _raw_to_fraction(b)


def enclose(expr: Callable[[], object], bits: int = 128) -> tuple[Fraction, Fraction]:
    """Evaluate ``expr`` (built from ``mpmath.iv`` operations) at ``bits`` precision."""
    with _ivprec(bits):
        return endpoints(expr())


def certified_floor(expr: Callable[[], object]) -> int:
    """Floor of the real number enclosed by ``expr``.

    ``expr`` is re-evaluated at increasing precision until both interval
    endpoints share a floor.
    """
    for bits in PRECISIONS:
        lo, hi = enclose(expr, bits)
        if math.floor(lo) == math.floor(hi):
            return math.floor(lo)
    raise AmbiguousFloorError(
        f"floor undecided at {PRECISIONS[-1]} bits: value in [{float(lo)}, {float(hi)}]"
    )


def certified_compare(value: Fraction, expr: Callable[[], object]) -> int:
    """Return -1 if ``value`` lies below the enclosed real, +1 if above.

    Raises AmbiguousFloorError if the interval keeps straddling ``value``.
    """
    value = Fraction(value)
    for bits in PRECISIONS:
        lo, hi = enclose(expr, bits)
        if value < lo:
            return -1
        if value > hi:
            return 1
    raise AmbiguousFloorError(f"comparison with {value} undecided")


def log_floor(n: int) -> int:
    """``floor(log n)`` for a positive integer, natural log."""
    if n < 1:
        raise ValueError("log_floor needs n >= 1")
    if n == 1:
        return 0
    return certified_floor(lambda: iv.log(iv.mpf(n)))
