"""Exact rational intervals and rational string formatting.

All endpoint arithmetic is done in `fractions.Fraction`, so interval
operations introduce no rounding of their own: the result interval always
contains the exact value of the operation applied to any members of the
operands.  Directed rounding happens only where series are summed (see
`series.py`), and there it is explicit.
"""

import sys
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

# exact rationals here routinely exceed the default int<->str digit cap
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(max(sys.get_int_max_str_digits(), 1_000_000))

Rational = Union[Fraction, int]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @staticmethod
    def point(x) -> "Interval":
        x = as_fraction(x)
        return Interval(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def exact(self) -> Fraction:
        """The single member of a degenerate interval."""
        if not self.is_point:
            raise ValueError(f"interval {self} is not a point")
        return self.lo

    def contains(self, x) -> bool:
        x = as_fraction(x)
        return self.lo <= x <= self.hi

    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    # --- arithmetic (exact, no rounding) ---

    def __add__(self, other) -> "Interval":
        other = coerce(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        return self + (-coerce(other))

    def __rsub__(self, other) -> "Interval":
        return coerce(other) + (-self)

    def __mul__(self, other) -> "Interval":
        other = coerce(other)
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def recip(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"interval {self} contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other) -> "Interval":
        return self * coerce(other).recip()

    def __rtruediv__(self, other) -> "Interval":
        return coerce(other) * self.recip()

    def abs(self) -> "Interval":
        """Interval of |x| over x in self."""
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(Fraction(0), max(-self.lo, self.hi))

    def abs_upper(self) -> Fraction:
        """Upper bound on |x| over x in self."""
        return max(abs(self.lo), abs(self.hi))

    def hull(self, other) -> "Interval":
        other = coerce(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersects(self, other) -> bool:
        other = coerce(other)
        return self.lo <= other.hi and other.lo <= self.hi

    def gap_to(self, other) -> Fraction:
        """Distance between self and other; 0 when they intersect.

        A positive gap is a certified lower bound on |x - y| for any
        x in self and y in other.
        """
        other = coerce(other)
        return max(Fraction(0), self.lo - other.hi, other.lo - self.hi)

    def __repr__(self):
        if self.is_point:
            return f"[{self.lo}]"
        return f"[{self.lo}, {self.hi}]"


def coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval.point(as_fraction(x))


Scalar = Union[Fraction, Interval]


def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Interval) or isinstance(b, Interval):
        return coerce(a) * coerce(b)
    return a * b


def scalar_add(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Interval) or isinstance(b, Interval):
        return coerce(a) + coerce(b)
    return a + b


def scalar_sub(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Interval) or isinstance(b, Interval):
        return coerce(a) - coerce(b)
    return a - b


def scalar_abs_upper(a: Scalar) -> Fraction:
    if isinstance(a, Interval):
        return a.abs_upper()
    return abs(a)


def scalar_upper(a: Scalar) -> Fraction:
    return a.hi if isinstance(a, Interval) else a


def scalar_lower(a: Scalar) -> Fraction:
    return a.lo if isinstance(a, Interval) else a


# --- serialization helpers ---


def rat_to_str(x: Fraction) -> str:
    return str(as_fraction(x))


def rat_from_str(s: str) -> Fraction:
    return Fraction(s)


def interval_to_json(iv: Interval) -> list:
    return [rat_to_str(iv.lo), rat_to_str(iv.hi)]


def interval_from_json(obj) -> Interval:
    lo, hi = obj
    return Interval(Fraction(lo), Fraction(hi))


def scalar_to_json(x: Scalar):
    if isinstance(x, Interval):
        return interval_to_json(x)
    return rat_to_str(x)


def scalar_from_json(obj) -> Scalar:
    if isinstance(obj, list):
        return interval_from_json(obj)
    return Fraction(obj)


def rat_to_decimal(x: Fraction, digits: int = 15) -> str:
    """Render a rational as a decimal with `digits` significant digits."""
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return str(d)
