"""
Exact power series in q for the counting generating functions, and the
last-level limit probabilities p_m as interval coefficients in u.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Sequence, Union

import pandas as pd

from canontree.services.model import check_arity
from canontree.utils.errors import CertificationError
from canontree.utils.interval import ONE, ZERO, Interval

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


class HpIndex(NamedTuple):
    j: int
    value: int


def hp(t: int, j: int) -> int:
    """1 + t + ... + t^(j-1); hp(0) = 0."""
    return (t ** j - 1) // (t - 1)


def hp_index(t: int, j: int) -> HpIndex:
    return HpIndex(j, hp(t, j))


class SeriesQ:
    """Truncated power series c_0 + c_1 q + ... + c_N q^N with exact coefficients."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Iterable[Scalar], order: int):
        values = [Fraction(c) for c in coeffs][: order + 1]
        values.extend([Fraction(0)] * (order + 1 - len(values)))
        self.coeffs = tuple(values)
        self.order = order

    @classmethod
    def constant(cls, value: Scalar, order: int) -> "SeriesQ":
        return cls([value], order)

    @classmethod
    def monomial(cls, exponent: int, order: int, coefficient: Scalar = 1) -> "SeriesQ":
        if exponent > order:
            return cls([], order)
        return cls([0] * exponent + [coefficient], order)

    @classmethod
    def geometric_tail(cls, step: int, order: int) -> "SeriesQ":
        """q^step / (1 - q^step) = sum over k >= 1 of q^(k*step)."""
        coeffs = [0] * (order + 1)
        for e in range(step, order + 1, step):
            coeffs[e] = 1
        return cls(coeffs, order)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n] if 0 <= n <= self.order else Fraction(0)

    def __len__(self) -> int:
        return self.order + 1

    def valuation(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return self.order + 1

    def _coerce(self, other) -> "SeriesQ":
        if isinstance(other, SeriesQ):
            return other
        return SeriesQ.constant(other, self.order)

    def __add__(self, other) -> "SeriesQ":
        other = self._coerce(other)
        order = min(self.order, other.order)
        return SeriesQ([a + b for a, b in zip(self.coeffs, other.coeffs)], order)

    __radd__ = __add__

    def __neg__(self) -> "SeriesQ":
        return SeriesQ([-c for c in self.coeffs], self.order)

    def __sub__(self, other) -> "SeriesQ":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SeriesQ":
        return self._coerce(other) - self

    def __mul__(self, other) -> "SeriesQ":
        if not isinstance(other, SeriesQ):
            factor = Fraction(other)
            return SeriesQ([c * factor for c in self.coeffs], self.order)
        order = min(self.order, other.order)
        out = [Fraction(0)] * (order + 1)
        for i, a in enumerate(self.coeffs[: order + 1]):
            if not a:
                continue
            for k, b in enumerate(other.coeffs[: order + 1 - i]):
                if b:
                    out[i + k] += a * b
        return SeriesQ(out, order)

    __rmul__ = __mul__

    def reciprocal(self) -> "SeriesQ":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ZeroDivisionError("series with zero constant term has no reciprocal")
        out = [Fraction(0)] * (self.order + 1)
        out[0] = 1 / c0
        for n in range(1, self.order + 1):
            acc = sum((self.coeffs[k] * out[n - k] for k in range(1, n + 1)), Fraction(0))
            out[n] = -acc / c0
        return SeriesQ(out, self.order)

    def __truediv__(self, other) -> "SeriesQ":
        if not isinstance(other, SeriesQ):
            return self * (1 / Fraction(other))
        return self * other.reciprocal()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesQ):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.coeffs, self.order))

    def __repr__(self) -> str:
        terms = [f"{c}*q^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"SeriesQ({' + '.join(terms) or '0'}; O(q^{self.order + 1}))"


def _product_terms(t: int, order: int):
    """Yield (j, P_j) with P_j = prod_{i<=j} y_i/(1 - y_i), y_i = q^hp(i), while nonzero."""
    product = SeriesQ.constant(1, order)
    j = 0
    yield j, product
    valuation = 0
    while True:
        j += 1
        valuation += hp(t, j)
        if valuation > order:
            return
        product = product * SeriesQ.geometric_tail(hp(t, j), order)
        yield j, product


def series_b(t: int, order: int) -> SeriesQ:
    """b(q,1,1,1) = sum over j >= 1 of (-1)^(j-1) P_j(q)."""
    check_arity(t)
    total = SeriesQ([], order)
    for j, product in _product_terms(t, order):
        if j:
            total = total + product * (1 if j % 2 else -1)
    return total


def series_a(t: int, order: int) -> SeriesQ:
    """a(q,1,1,1) = sum over j >= 0 of (-1)^j q^hp(j) P_j(q)."""
    check_arity(t)
    total = SeriesQ([], order)
    for j, product in _product_terms(t, order):
        term = SeriesQ.monomial(hp(t, j), order) * product
        total = total + term * (-1 if j % 2 else 1)
    return total


def series_H(t: int, order: int) -> SeriesQ:
    """H(q,1,1,1) = a / (1 - b): the counting series of canonical trees."""
    return series_a(t, order) / (1 - series_b(t, order))


def series_dump(t: int, order: int, which: str = "H") -> pd.DataFrame:
    builders = {"H": series_H, "a": series_a, "b": series_b}
    if which not in builders:
        raise ValueError(f"unknown series {which!r}; expected H, a or b")
    s = builders[which](t, order)
    return pd.DataFrame(
        {"n": list(range(order + 1)), "coefficient": [str(c) for c in s.coeffs]},
        columns=["n", "coefficient"],
    )


# ----------------------------------------------------------------------
# interval coefficient series in U = u^t
# ----------------------------------------------------------------------
def _poly_mul(a: Sequence[Interval], b: Sequence[Interval], order: int) -> List[Interval]:
    out = [ZERO] * (order + 1)
    for i, x in enumerate(a):
        if x.lo == 0.0 and x.hi == 0.0:
            continue
        for k in range(0, order + 1 - i):
            y = b[k]
            if y.lo == 0.0 and y.hi == 0.0:
                continue
            out[i + k] = out[i + k] + x * y
    return out


def p_table(t: int, q0: Interval, M: int, max_width: float = 1e-6) -> List[Interval]:
    """
    Enclosures of p_1..p_M, where p_m = [u^(mt)] b(q0, u, 1, 1).

    With U = u^t, term j of b has U-valuation hp(j), so only j with
    hp(j) <= M touch the requested coefficients and the sum is finite.
    """
    check_arity(t)
    if M < 1:
        return []
    if not (0.0 < q0.lo and q0.hi < 1.0):
        raise CertificationError(f"q0 enclosure {q0} is not inside (0, 1)")
    total = [ZERO] * (M + 1)
    product = [ONE] + [ZERO] * M
    j = 1
    while hp(t, j) <= M:
        weight = q0 ** hp(t, j)
        stride = t ** (j - 1)
        factor = [ZERO] * (M + 1)
        power = weight
        for e in range(stride, M + 1, stride):
            factor[e] = power
            power = power * weight
        product = _poly_mul(product, factor, M)
        sign = 1 if j % 2 else -1
        total = [acc + sign * c for acc, c in zip(total, product)]
        j += 1
    table = total[1:]
    widest = max(p.width() for p in table)
    if widest > max_width:
        raise CertificationError(
            f"p_m enclosures reach width {widest:.3g}; q0 enclosure {q0} is too wide"
        )
    logger.debug("p_table t=%d M=%d uses %d terms", t, M, j - 1)
    return table


def p_recursive(t: int, q0: Interval, M: int) -> List[Interval]:
    """p_r = q^r (1 - sum_{s < ceil(r/t)} p_s), an identity valid for every q."""
    table: List[Interval] = []
    prefix = [ZERO]
    power = ONE
    for r in range(1, M + 1):
        power = power * q0
        k = -(-r // t)
        table.append(power * (1 - prefix[k - 1]))
        prefix.append(prefix[-1] + table[-1])
    return table
