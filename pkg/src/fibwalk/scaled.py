"""Overflow-free reals stored as ``mantissa * 2**exponent``.

Continuants of walk coefficients grow or shrink geometrically with their
order, so a few hundred states are enough to leave the double range.  Every
formula downstream only needs ratios of such values; keeping the binary
exponent in a Python int lets the ratio be formed before rounding back to a
float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

Number = Union[int, float, "ScaledReal"]


@dataclass(frozen=True)
class ScaledReal:
    """Signed value ``mantissa * 2**exponent`` with ``1 <= |mantissa| < 2``.

    Zero is stored as ``(0.0, 0)``.  Instances are immutable and compare by
    value of their normalized fields.
    """

    mantissa: float = 0.0
    exponent: int = 0

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if not math.isfinite(m):
            raise ValueError(f"non-finite mantissa {m!r}")
        if m == 0.0:
            object.__setattr__(self, "mantissa", 0.0)
            object.__setattr__(self, "exponent", 0)
            return
        f, k = math.frexp(m)
        object.__setattr__(self, "mantissa", 2.0 * f)
        object.__setattr__(self, "exponent", int(e) + k - 1)

    @classmethod
    def of(cls, value: Number) -> "ScaledReal":
        if isinstance(value, ScaledReal):
            return value
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"cannot scale non-finite value {value!r}")
        return cls(value, 0)

    # conversions -------------------------------------------------------

    def to_real(self) -> float:
        """Round to a float; raises ``OverflowError`` past the double range."""
        return math.ldexp(self.mantissa, self.exponent)

    __float__ = to_real

    def ratio(self, other: Number) -> float:
        """``self / other`` as a float, exact up to one rounding."""
        return (self / other).to_real()

    def log2abs(self) -> float:
        if self.mantissa == 0.0:
            return -math.inf
        return self.exponent + math.log2(abs(self.mantissa))

    # arithmetic --------------------------------------------------------

    def __bool__(self):
        return self.mantissa != 0.0

    def __neg__(self):
        return ScaledReal(-self.mantissa, self.exponent)

    def __abs__(self):
        return ScaledReal(abs(self.mantissa), self.exponent)

    def __mul__(self, other: Number) -> "ScaledReal":
        o = ScaledReal.of(other)
        if not self or not o:
            return ScaledReal()
        return ScaledReal(self.mantissa * o.mantissa, self.exponent + o.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "ScaledReal":
        o = ScaledReal.of(other)
        if not o:
            raise ZeroDivisionError("division by a zero ScaledReal")
        if not self:
            return ScaledReal()
        return ScaledReal(self.mantissa / o.mantissa, self.exponent - o.exponent)

    def __rtruediv__(self, other: Number) -> "ScaledReal":
        return ScaledReal.of(other) / self

    def __add__(self, other: Number) -> "ScaledReal":
        o = ScaledReal.of(other)
        if not o:
            return self
        if not self:
            return o
        big, small = (self, o) if self.exponent >= o.exponent else (o, self)
        # ldexp underflows to 0.0 gracefully when the gap is huge
        m = big.mantissa + math.ldexp(small.mantissa, small.exponent - big.exponent)
        return ScaledReal(m, big.exponent)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "ScaledReal":
        return self + (-ScaledReal.of(other))

    def __rsub__(self, other: Number) -> "ScaledReal":
        return ScaledReal.of(other) - self

    def __repr__(self):
        return f"ScaledReal({self.mantissa!r}, {self.exponent})"


ZERO = ScaledReal(0.0, 0)
ONE = ScaledReal(1.0, 0)


def normalize(value: float) -> ScaledReal:
    """Split a finite float into normalized mantissa and exponent."""
    return ScaledReal.of(value)


# error-free transformations (Dekker / Knuth), used by compensated recurrences

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a: float, b: float):
    """``a + b`` as ``(s, e)`` with ``s = fl(a + b)`` and ``s + e`` exact."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a: float, b: float):
    """``a * b`` as ``(p, e)`` with ``p = fl(a * b)`` and ``p + e`` exact."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


class CompensatedPair:
    """Running pair ``(current, previous)`` of a three-term recurrence.

    Each value is a double-double ``(hi + lo) * 2**exponent``; the shared
    exponent is moved whenever ``current`` drifts far from 1, so neither
    overflow nor underflow can occur.  :meth:`step` computes
    ``a * current + b * previous`` with error-free products and sums and
    shifts the pair.
    """

    __slots__ = ("ch", "cl", "ph", "pl", "exponent")

    _HIGH = 2.0 ** 400
    _LOW = 2.0 ** -400

    def __init__(self, current: float = 1.0, previous: float = 0.0):
        self.ch, self.cl = float(current), 0.0
        self.ph, self.pl = float(previous), 0.0
        self.exponent = 0

    def step(self, a: float, b: float) -> None:
        p1, e1 = two_prod(a, self.ch)
        if b != 0.0 and self.ph != 0.0:
            p2, e2 = two_prod(b, self.ph)
            tail = e1 + e2 + (a * self.cl + b * self.pl)
        else:
            p2 = 0.0
            tail = e1 + a * self.cl
        s, e3 = two_sum(p1, p2)
        hi, lo = two_sum(s, e3 + tail)
        self.ph, self.pl = self.ch, self.cl
        self.ch, self.cl = hi, lo
        mag = abs(hi)
        if mag > self._HIGH or (0.0 < mag < self._LOW):
            k = math.frexp(hi)[1]
            self.ch, self.cl = math.ldexp(self.ch, -k), math.ldexp(self.cl, -k)
            self.ph, self.pl = math.ldexp(self.ph, -k), math.ldexp(self.pl, -k)
            self.exponent += k

    @property
    def current(self) -> ScaledReal:
        return ScaledReal(self.ch + self.cl, self.exponent)
