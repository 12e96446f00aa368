"""
Certified interval and complex-box arithmetic.

Endpoints are binary64 floats computed in round-to-nearest and then nudged one
representable number outward with ``math.nextafter``, so every result encloses
the exact value. ``ln``, ``exp`` and the circle functions trust the platform
library to be faithfully rounded and widen by two ulps instead of one.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Union

from canontree.utils.errors import IntervalDomainError

_INF = math.inf
_EXACT_INT = 2 ** 53

Number = Union[int, float, Fraction]


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _add_down(x: float, y: float) -> float:
    if y == 0.0:
        return x
    if x == 0.0:
        return y
    return _down(x + y)


def _add_up(x: float, y: float) -> float:
    if y == 0.0:
        return x
    if x == 0.0:
        return y
    return _up(x + y)


def _mul_down(x: float, y: float) -> float:
    if x == 0.0 or y == 0.0:
        return 0.0
    if x == 1.0:
        return y
    if y == 1.0:
        return x
    return _down(x * y)


def _mul_up(x: float, y: float) -> float:
    if x == 0.0 or y == 0.0:
        return 0.0
    if x == 1.0:
        return y
    if y == 1.0:
        return x
    return _up(x * y)


def _div_down(x: float, y: float) -> float:
    if x == 0.0:
        return 0.0
    if y == 1.0:
        return x
    return _down(x / y)


def _div_up(x: float, y: float) -> float:
    if x == 0.0:
        return 0.0
    if y == 1.0:
        return x
    return _up(x / y)


def _pow_up(x: float, n: int) -> float:
    # x >= 0
    if x == 0.0 or x == 1.0:
        return x
    result, base = 1.0, x
    while n:
        if n & 1:
            result = _mul_up(result, base)
        n >>= 1
        if n:
            base = _mul_up(base, base)
    return result


def _pow_down(x: float, n: int) -> float:
    if x == 0.0 or x == 1.0:
        return x
    result, base = 1.0, x
    while n:
        if n & 1:
            result = max(0.0, _mul_down(result, base))
        n >>= 1
        if n:
            base = max(0.0, _mul_down(base, base))
    return result


def _coerce(value) -> Optional["Interval"]:
    if isinstance(value, Interval):
        return value
    if isinstance(value, bool):
        return None
    if isinstance(value, float):
        return Interval(value, value)
    if isinstance(value, int):
        f = float(value)
        if abs(value) <= _EXACT_INT:
            return Interval(f, f)
        return Interval(_down(f), _up(f))
    if isinstance(value, Fraction):
        f = float(value)
        if Fraction(f) == value:
            return Interval(f, f)
        return Interval(_down(f), _up(f))
    return None


class Interval:
    """Closed real interval [lo, hi] with outward-rounded arithmetic."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: Optional[float] = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise IntervalDomainError(f"invalid interval bounds [{lo!r}, {hi!r}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, value: Number) -> "Interval":
        """Smallest float interval containing an int, float or Fraction."""
        result = _coerce(value)
        if result is None:
            raise TypeError(f"cannot make an interval from {type(value).__name__}")
        return result

    @classmethod
    def hull_of(cls, items: Iterable["Interval"]) -> "Interval":
        items = list(items)
        if not items:
            raise ValueError("hull of an empty collection")
        return cls(min(i.lo for i in items), max(i.hi for i in items))

    # ------------------------------------------------------------------
    # inspection
    # ------------------------------------------------------------------
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    def width(self) -> float:
        return _up(self.hi - self.lo) if self.hi > self.lo else 0.0

    def mag(self) -> float:
        """Upper bound of |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        """Lower bound of |x| over the interval."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, value) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= value <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def overlaps(self, other: "Interval") -> bool:
        other = Interval.point(other) if not isinstance(other, Interval) else other
        return self.lo <= other.hi and other.lo <= self.hi

    def is_positive(self) -> bool:
        return self.lo > 0.0

    def is_negative(self) -> bool:
        return self.hi < 0.0

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def inflate(self, radius: float) -> "Interval":
        if radius == 0.0:
            return self
        return Interval(_down(self.lo - radius), _up(self.hi + radius))

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval(_add_down(self.lo, o.lo), _add_up(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval(_add_down(self.lo, -o.hi), _add_up(self.hi, -o.lo))

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        if a >= 0.0 and c >= 0.0:
            return Interval(_mul_down(a, c), _mul_up(b, d))
        if b <= 0.0 and d <= 0.0:
            return Interval(_mul_down(b, d), _mul_up(a, c))
        lows = (_mul_down(a, c), _mul_down(a, d), _mul_down(b, c), _mul_down(b, d))
        highs = (_mul_up(a, c), _mul_up(a, d), _mul_up(b, c), _mul_up(b, d))
        return Interval(min(lows), max(highs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if o.lo <= 0.0 <= o.hi:
            raise IntervalDomainError(f"division by an interval containing zero: {o}")
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        lows = (_div_down(a, c), _div_down(a, d), _div_down(b, c), _div_down(b, d))
        highs = (_div_up(a, c), _div_up(a, d), _div_up(b, c), _div_up(b, d))
        return Interval(min(lows), max(highs))

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if isinstance(n, bool) or not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ONE / self ** (-n)
        if n == 0:
            return ONE
        if n == 1:
            return self
        if self.lo >= 0.0:
            return Interval(_pow_down(self.lo, n), _pow_up(self.hi, n))
        if self.hi <= 0.0:
            lo, hi = _pow_down(-self.hi, n), _pow_up(-self.lo, n)
            return Interval(lo, hi) if n % 2 == 0 else Interval(-hi, -lo)
        if n % 2 == 0:
            return Interval(0.0, _pow_up(max(-self.lo, self.hi), n))
        return Interval(-_pow_up(-self.lo, n), _pow_up(self.hi, n))

    def pow_int(self, n: int) -> "Interval":
        return self ** n

    def sqr(self) -> "Interval":
        if self.lo >= 0.0:
            return Interval(_mul_down(self.lo, self.lo), _mul_up(self.hi, self.hi))
        if self.hi <= 0.0:
            return Interval(_mul_down(self.hi, self.hi), _mul_up(self.lo, self.lo))
        m = max(-self.lo, self.hi)
        return Interval(0.0, _mul_up(m, m))

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def abs(self) -> "Interval":
        return abs(self)

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise IntervalDomainError(f"sqrt of an interval with negative part: {self}")
        lo = max(0.0, _down(math.sqrt(self.lo))) if self.lo > 0.0 else 0.0
        return Interval(lo, _up(math.sqrt(self.hi)))

    def ln(self) -> "Interval":
        if self.lo <= 0.0:
            raise IntervalDomainError(f"ln of a non-positive interval: {self}")
        lo = _down(_down(math.log(self.lo)))
        hi = _up(_up(math.log(self.hi)))
        return Interval(lo, hi)

    def exp(self) -> "Interval":
        try:
            lo = max(0.0, _down(_down(math.exp(self.lo))))
        except OverflowError:
            lo = 1.7976931348623157e308
        try:
            hi = _up(_up(math.exp(self.hi)))
        except OverflowError:
            hi = _INF
        return Interval(lo, hi)

    # ------------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"[{self.lo:.17g}, {self.hi:.17g}]"

    __str__ = __repr__


ZERO = Interval(0.0)
ONE = Interval(1.0)
PI = Interval(math.pi, _up(math.pi))
# upper end of the phase scan, strictly above pi
PI_HI = _up(math.pi)


def _complex_coerce(value) -> Optional["ComplexBox"]:
    if isinstance(value, ComplexBox):
        return value
    if isinstance(value, complex):
        return ComplexBox(Interval(value.real), Interval(value.imag))
    real = _coerce(value)
    if real is None:
        return None
    return ComplexBox(real, ZERO)


class ComplexBox:
    """Axis-aligned rectangle re + i*im in the complex plane."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        self.re = Interval.point(re) if not isinstance(re, Interval) else re
        if im is None:
            self.im = ZERO
        else:
            self.im = Interval.point(im) if not isinstance(im, Interval) else im

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexBox":
        return cls(Interval(z.real), Interval(z.imag))

    @classmethod
    def around(cls, center: complex, radius: float) -> "ComplexBox":
        """Box containing the closed disk of the given radius."""
        return cls(Interval(center.real).inflate(radius), Interval(center.imag).inflate(radius))

    def center(self) -> complex:
        return complex(self.re.mid(), self.im.mid())

    def is_real(self) -> bool:
        return self.im.lo == 0.0 and self.im.hi == 0.0

    def __neg__(self) -> "ComplexBox":
        return ComplexBox(-self.re, -self.im)

    def __add__(self, other):
        o = _complex_coerce(other)
        if o is None:
            return NotImplemented
        return ComplexBox(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _complex_coerce(other)
        if o is None:
            return NotImplemented
        return ComplexBox(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _complex_coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (Interval, int, float, Fraction)) and not isinstance(other, bool):
            real = _coerce(other)
            return ComplexBox(self.re * real, self.im * real)
        o = _complex_coerce(other)
        if o is None:
            return NotImplemented
        if o.is_real():
            return ComplexBox(self.re * o.re, self.im * o.re)
        if self.is_real():
            return ComplexBox(o.re * self.re, o.im * self.re)
        a, b, c, d = self.re, self.im, o.re, o.im
        return ComplexBox(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _complex_coerce(other)
        if o is None:
            return NotImplemented
        if o.is_real():
            return ComplexBox(self.re / o.re, self.im / o.re)
        denominator = o.re.sqr() + o.im.sqr()
        if denominator.lo <= 0.0:
            raise IntervalDomainError(f"division by a box containing zero: {o}")
        numerator = self * o.conj()
        return ComplexBox(numerator.re / denominator, numerator.im / denominator)

    def __rtruediv__(self, other):
        o = _complex_coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if isinstance(n, bool) or not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ComplexBox(ONE) / self ** (-n)
        if self.is_real():
            return ComplexBox(self.re ** n)
        result = ComplexBox(ONE)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def pow_int(self, n: int) -> "ComplexBox":
        return self ** n

    def conj(self) -> "ComplexBox":
        return ComplexBox(self.re, -self.im)

    def __abs__(self) -> Interval:
        if self.is_real():
            return abs(self.re)
        return (self.re.sqr() + self.im.sqr()).sqrt()

    def abs(self) -> Interval:
        return abs(self)

    def sqrt(self) -> "ComplexBox":
        """Principal square root. Boxes touching the cut along the non-positive reals are rejected."""
        if self.is_real() and self.re.lo >= 0.0:
            return ComplexBox(self.re.sqrt())
        if self.im.contains_zero() and self.re.lo <= 0.0:
            raise IntervalDomainError(f"sqrt of a box meeting the branch cut: {self}")
        r = abs(self)
        a = (r + self.re) * 0.5
        b = (r - self.re) * 0.5
        re_part = Interval(max(0.0, a.lo), a.hi).sqrt()
        s = Interval(max(0.0, b.lo), b.hi).sqrt()
        if self.im.lo >= 0.0:
            im_part = s
        elif self.im.hi <= 0.0:
            im_part = -s
        else:
            im_part = Interval(-s.hi, s.hi)
        return ComplexBox(re_part, im_part)

    def mag(self) -> float:
        return abs(self).hi

    def mig(self) -> float:
        return abs(self).lo

    def contains(self, value) -> bool:
        if isinstance(value, ComplexBox):
            return self.re.contains(value.re) and self.im.contains(value.im)
        z = complex(value)
        return self.re.contains(z.real) and self.im.contains(z.imag)

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def overlaps(self, other: "ComplexBox") -> bool:
        o = _complex_coerce(other)
        return self.re.overlaps(o.re) and self.im.overlaps(o.im)

    def hull(self, other: "ComplexBox") -> "ComplexBox":
        return ComplexBox(self.re.hull(other.re), self.im.hull(other.im))

    def inflate(self, radius: float) -> "ComplexBox":
        return ComplexBox(self.re.inflate(radius), self.im.inflate(radius))

    def __repr__(self) -> str:
        return f"{self.re} + i{self.im}"


def _extremum_inside(lo: float, hi: float, offset: float):
    """Yield k for every point (k + offset)*pi that may lie in [lo, hi]."""
    k_first = math.floor(lo / math.pi - offset) - 1
    k_last = math.ceil(hi / math.pi - offset) + 1
    for k in range(k_first, k_last + 1):
        p = (k + offset) * math.pi
        slack = 4.0 * math.ulp(p) + (abs(k) + 1) * 2.5e-16
        if lo - slack <= p <= hi + slack:
            yield k


def _circle_range(phi: Interval, fn, offset: float) -> Interval:
    if phi.hi - phi.lo >= 2.0 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = fn(phi.lo), fn(phi.hi)
    lo = max(-1.0, _down(_down(min(a, b))))
    hi = min(1.0, _up(_up(max(a, b))))
    for k in _extremum_inside(phi.lo, phi.hi, offset):
        if k % 2 == 0:
            hi = 1.0
        else:
            lo = -1.0
    return Interval(lo, hi)


def cos_range(phi: Interval) -> Interval:
    return _circle_range(phi, math.cos, 0.0)


def sin_range(phi: Interval) -> Interval:
    return _circle_range(phi, math.sin, 0.5)


def unit_circle_point(phi: Interval) -> ComplexBox:
    """Box containing e^{i*phi} for every phi in the interval."""
    if not isinstance(phi, Interval):
        phi = Interval.point(phi)
    if phi.lo == 0.0 and phi.hi == 0.0:
        return ComplexBox(ONE, ZERO)
    return ComplexBox(cos_range(phi), sin_range(phi))


def magnitude(value) -> float:
    """Upper bound of |value| for an Interval or ComplexBox."""
    return value.mag()


def mignitude(value) -> float:
    """Lower bound of |value| for an Interval or ComplexBox."""
    return value.mig()
