"""
Certified evaluation of the truncated generating-function sums.

With x_i = q^hp(i) u^(t^i) and P_j = prod_{i<=j} x_i/(1 - x_i):

    b(q,u,1,w) = sum_{j>=1} (-1)^(j-1) w^j P_j
    b(q,1,v,1) = sum_{j>=1} v y_j/(1-y_j) prod_{i<j} (1 - v - y_i)/(1 - y_i),  y_i = q^hp(i)
    a(q,1,1,1) = sum_{j>=0} (-1)^j q^hp(j) P_j(q,1)

Derivatives use the operators Phi_z = z d/dz. Every factor of a term is a
monomial in (q, u, w) composed with a rational function of one monomial, so the
Phi-derivatives up to order two follow in closed form and are carried as
``PhiJet`` values. The infinite tail beyond the truncation order J is bounded
separately and reported as ``CertifiedValue.tail_bound``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from canontree.services.series import hp
from canontree.utils import config
from canontree.utils.errors import HypothesisError, TruncationError
from canontree.utils.interval import ONE, ZERO, ComplexBox, Interval

logger = logging.getLogger(__name__)

Box = Union[Interval, ComplexBox]

_LN_SQRT2 = Interval(2.0).ln() * 0.5
_SIX_FIFTHS_LN = Interval(6.0).ln() - Interval(5.0).ln()
_FIVE_THIRDS = Interval(5.0) / 3
_FIVE_SIXTHS_LN = Interval(5.0).ln() - Interval(6.0).ln()


class DerivOrder(NamedTuple):
    """Orders of Phi_q, Phi_u and Phi_w (Phi_v for the depth denominator)."""

    alpha: int = 0
    beta: int = 0
    gamma: int = 0

    @property
    def total(self) -> int:
        return self.alpha + self.beta + self.gamma

    def validate(self) -> "DerivOrder":
        if min(self) < 0 or max(self) > 2 or self.total > 2:
            raise ValueError(f"derivative order {tuple(self)} is outside total order <= 2")
        return self


VALUE = DerivOrder(0, 0, 0)

# component layout of a jet
_INDEX = {
    (0, 0, 0): 0,
    (1, 0, 0): 1,
    (0, 1, 0): 2,
    (0, 0, 1): 3,
    (2, 0, 0): 4,
    (0, 2, 0): 5,
    (0, 0, 2): 6,
    (1, 1, 0): 7,
    (1, 0, 1): 8,
    (0, 1, 1): 9,
}
_PAIR = {(0, 0): 4, (1, 1): 5, (2, 2): 6, (0, 1): 7, (0, 2): 8, (1, 2): 9}


def _sum(*terms):
    total = None
    for term in terms:
        if term is None:
            continue
        total = term if total is None else total + term
    return total


def _mul(a, b):
    if a is None or b is None:
        return None
    return a * b


class PhiJet:
    """Value and Phi-derivatives up to order two in the variables (q, u, w)."""

    __slots__ = ("c",)

    def __init__(self, components: List):
        self.c = components

    @classmethod
    def constant(cls, value) -> "PhiJet":
        return cls([value] + [None] * 9)

    @classmethod
    def from_derivatives(cls, f0, f1, f2, exponents: Sequence[int], derivatives: bool = True) -> "PhiJet":
        """
        Jet of g(X) for a monomial X with exponent vector e, given
        f0 = g(X), f1 = X g'(X) and f2 = X (X g'(X))'.
        Then Phi_a = e_a f1 and Phi_a Phi_b = e_a e_b f2.
        """
        c = [f0] + [None] * 9
        if not derivatives:
            return cls(c)
        for a, e in enumerate(exponents):
            if e:
                c[1 + a] = f1 * e
        for (a, b), k in _PAIR.items():
            e = exponents[a] * exponents[b]
            if e:
                c[k] = f2 * e
        return cls(c)

    @classmethod
    def monomial(cls, value, exponents: Sequence[int], derivatives: bool = True) -> "PhiJet":
        return cls.from_derivatives(value, value, value, exponents, derivatives)

    def __getitem__(self, order: Tuple[int, int, int]):
        value = self.c[_INDEX[tuple(order)]]
        return ZERO if value is None else value

    def __add__(self, other: "PhiJet") -> "PhiJet":
        return PhiJet([_sum(a, b) for a, b in zip(self.c, other.c)])

    def __neg__(self) -> "PhiJet":
        return PhiJet([None if a is None else -a for a in self.c])

    def __sub__(self, other: "PhiJet") -> "PhiJet":
        return self + (-other)

    def __mul__(self, other) -> "PhiJet":
        if not isinstance(other, PhiJet):
            return PhiJet([None if a is None else a * other for a in self.c])
        f, g = self.c, other.c
        out: List = [None] * 10
        out[0] = f[0] * g[0]
        for a in range(3):
            out[1 + a] = _sum(_mul(f[1 + a], g[0]), _mul(f[0], g[1 + a]))
        for (a, b), k in _PAIR.items():
            cross = _mul(f[1 + a], g[1 + b])
            if a == b:
                cross = None if cross is None else cross + cross
            else:
                cross = _sum(cross, _mul(f[1 + b], g[1 + a]))
            out[k] = _sum(_mul(f[k], g[0]), _mul(f[0], g[k]), cross)
        return PhiJet(out)

    __rmul__ = __mul__


@dataclass(frozen=True)
class CertifiedValue:
    """Enclosure of a truncated sum; the exact value lies within tail_bound of it."""

    enclosure: Box
    tail_bound: float
    J: int

    def inflated(self) -> Box:
        return self.enclosure.inflate(self.tail_bound)


class JetEvaluation:
    """A finite-sum jet together with the tail bound for each derivative order."""

    def __init__(self, jet: PhiJet, tail: Callable[[DerivOrder], float], J: int):
        self.jet = jet
        self._tail = tail
        self.J = J

    def tail(self, order: DerivOrder = VALUE) -> float:
        return self._tail(DerivOrder(*order).validate())

    def value(self, order: DerivOrder = VALUE) -> CertifiedValue:
        order = DerivOrder(*order).validate()
        return CertifiedValue(self.jet[order], self._tail(order), self.J)

    def inflated(self, order: DerivOrder = VALUE) -> Box:
        return self.value(order).inflated()


def _as_box(value) -> Box:
    if isinstance(value, (Interval, ComplexBox)):
        return value
    if isinstance(value, complex):
        return ComplexBox.from_complex(value)
    return Interval.point(value)


def _is_exact_one(value: Box) -> bool:
    if isinstance(value, ComplexBox):
        if not value.is_real():
            return False
        value = value.re
    return value.lo == 1.0 and value.hi == 1.0


def _hi(value: Interval) -> float:
    return value.hi


def _check_truncation(t: int, J: Optional[int]) -> int:
    J = config.default_truncation(t) if J is None else J
    if J < 1:
        raise ValueError(f"truncation order must be at least 1, got {J}")
    return J


def _x_boxes(t: int, q: Box, u: Box, count: int) -> List[Box]:
    """x_1 .. x_count with x_1 = q u^t and x_{i+1} = q x_i^t."""
    xs: List[Box] = []
    x = q * u ** t
    for i in range(count):
        if i:
            x = q * x ** t
        xs.append(x)
    return xs


def _log_geometric(x: Box):
    """(g, X g', X (X g')') for g = X/(1-X), evaluated at X = x."""
    inverse = 1 / (1 - x)
    f0 = x * inverse
    f1 = f0 * inverse
    f2 = f1 * (1 + x) * inverse
    return f0, f1, f2, inverse


def _factorial(k: int) -> int:
    return math.factorial(k)


def _stirling2(k: int, i: int) -> int:
    # Phi^k = sum_i S(k, i) z^i d^i/dz^i, for k <= 2
    if k == 0:
        return 1 if i == 0 else 0
    if i == 0 or i > k:
        return 0
    return 1


def _mag_power(base: float, exponent: int) -> Interval:
    return Interval(base) ** exponent


def _exp_bound(log_value: Interval) -> Interval:
    return log_value.exp()


# ----------------------------------------------------------------------
# tail bounds
# ----------------------------------------------------------------------
class _UWTail:
    """Tail bounds for b(q,u,1,w) truncated before term J."""

    def __init__(self, t: int, q: Box, u: Box, w: Box, J: int, xs: Sequence[Box], pinned_u: bool):
        self.t, self.J = t, J
        self.mq, self.mu, self.mw = q.mag(), u.mag(), w.mag()
        self.pinned_u = pinned_u
        if _hi(Interval(self.mq) * _mag_power(self.mu, t - 1)) >= 1.0:
            raise HypothesisError("|q u^(t-1)| < 1", f"|q| <= {self.mq:.6g}, |u| <= {self.mu:.6g}")
        x_next = _hi(_mag_power(self.mq, hp(t, J + 1)) * _mag_power(self.mu, t ** (J + 1)))
        if x_next >= 1.0:
            raise TruncationError("tail_ratio_uw < 1", f"|x_(J+1)| = {x_next:.3g}; increase J")
        ratio = Interval(self.mw) * x_next / (1 - Interval(x_next))
        self.ratio = _hi(ratio)
        if self.ratio >= 1.0:
            raise TruncationError("tail_ratio_uw < 1", f"ratio = {self.ratio:.3g} at J={J}; increase J")
        head = _mag_power(self.mw, J)
        for x in xs[:J]:
            distance = (1 - x).mig()
            if distance <= 0.0:
                raise HypothesisError("|1 - x_i| > 0", f"x_i = {x}")
            head = head * x.mag() / Interval(distance)
        self.head = _hi(head)
        self.order0 = _hi(Interval(self.head) / (1 - Interval(self.ratio)))
        x1 = _hi(Interval(self.mq) * _mag_power(self.mu, t))
        # |x_i| decreases in i when |q| <= 1 and |x_1| < 1
        self.direct_ok = self.mq <= 1.0 and x1 < 1.0
        self.kappa = _hi(1 / (1 - Interval(x1))) if self.direct_ok else math.inf
        self._plain: Dict[bool, Tuple[bool, Optional[Interval]]] = {}

    def _direct(self, k: int) -> float:
        if not self.direct_ok:
            return math.inf
        growth = Interval(float(self.t)) ** k * self.ratio
        if growth.hi >= 1.0:
            return math.inf
        coefficient = 2 if k == 2 else 1
        spread = Interval(1.0) + 2 * Interval(self.kappa)
        bound = (
            coefficient
            * spread ** k
            * Interval(self.head)
            * Interval(float(self.t)) ** (k * self.J)
            / (1 - growth)
        )
        return _hi(bound)

    def _plain_bounds(self, order: DerivOrder):
        """Bounds on plain partial derivatives of the tail, or None when unusable."""
        u_branch = not (self.pinned_u and order.beta == 0)
        if u_branch not in self._plain:
            t, J = self.t, self.J
            if self.mq > 2.0 / 3.0:
                raise HypothesisError("|q| <= 2/3 for derivative tails", f"|q| <= {self.mq:.6g}")
            if self.mw > 1.5:
                raise HypothesisError("|w| <= 3/2 for derivative tails", f"|w| <= {self.mw:.6g}")
            if u_branch:
                ln2 = Interval(2.0).ln()
                if t > 2:
                    big_u = 1 - ln2 / (t * t)
                else:
                    big_u = 1 - Interval(19.0) * ln2 / 80
                limit = 1 / big_u - _LN_SQRT2 / (t * t)
                if self.mu >= limit.lo:
                    raise HypothesisError(
                        "|u| < 1/U - ln(sqrt 2)/t^2 for derivative tails", f"|u| <= {self.mu:.6g}"
                    )
                log_u = big_u.ln()
            else:
                log_u = ZERO

            def factor(i: int) -> Interval:
                return _exp_bound(_SIX_FIFTHS_LN * hp(t, i) + log_u * (t ** i)) - 1

            denominator = factor(J + 1)
            if denominator.lo <= 0.0:
                raise TruncationError("derivative tail ratio < 1", f"at J={J}; increase J")
            ratio = _FIVE_THIRDS / denominator
            if ratio.hi >= 1.0:
                raise TruncationError(
                    "derivative tail ratio < 1", f"ratio = {ratio.hi:.3g} at J={J}; increase J"
                )
            factors = [factor(i) for i in range(1, J + 1)]
            if any(f.lo <= 0.0 for f in factors):
                self._plain[u_branch] = (False, None)
            else:
                base = _FIVE_THIRDS ** J / (1 - ratio)
                for f in factors:
                    base = base / f
                self._plain[u_branch] = (True, base)
        return self._plain[u_branch]

    def _plain_partial(self, a: int, b: int, c: int, base: Interval) -> float:
        scale = Interval(float(_factorial(a) * _factorial(b) * _factorial(c)))
        scale = scale * (Interval(float(self.t * self.t)) / _LN_SQRT2) ** b
        return _hi(scale * Interval(6.0) ** (a + c) * base)

    def bound(self, order: DerivOrder) -> float:
        if order.total == 0:
            return self.order0
        usable, base = self._plain_bounds(order)
        best = self._direct(order.total)
        if usable:
            total = Interval(0.0)
            magnitudes = (self.mq, self.mu, self.mw)
            for a in range(order.alpha + 1):
                for b in range(order.beta + 1):
                    for c in range(order.gamma + 1):
                        s = _stirling2(order.alpha, a) * _stirling2(order.beta, b) * _stirling2(order.gamma, c)
                        if not s:
                            continue
                        partial = self.order0 if a + b + c == 0 else self._plain_partial(a, b, c, base)
                        weight = Interval(magnitudes[0]) ** a * Interval(magnitudes[1]) ** b * Interval(magnitudes[2]) ** c
                        total = total + s * weight * partial
            best = min(best, total.hi)
        if math.isinf(best):
            raise TruncationError("derivative tail ratio < 1", f"no usable derivative tail bound at J={self.J}")
        return best


class _VTail:
    """Tail bounds for the depth sum b(q,1,v,1) truncated before term J."""

    def __init__(self, t: int, q: Box, v: Box, J: int, ys: Sequence[Box]):
        self.t, self.J = t, J
        self.mq, self.mv = q.mag(), v.mag()
        if self.mq >= 1.0:
            raise HypothesisError("|q| < 1", f"|q| <= {self.mq:.6g}")
        mv = Interval(self.mv)
        q_hp = _mag_power(self.mq, hp(t, J))
        ratio = _mag_power(self.mq, t ** J) * (1 + mv / (1 - q_hp))
        self.ratio = ratio.hi
        if self.ratio >= 1.0:
            raise TruncationError("tail_ratio_v < 1", f"ratio = {self.ratio:.3g} at J={J}; increase J")
        distance = (1 - ys[J - 1]).mig()
        if distance <= 0.0:
            raise HypothesisError("|1 - q^hp(J)| > 0")
        head = mv * q_hp / Interval(distance)
        for y in ys[: J - 1]:
            d = (1 - y).mig()
            if d <= 0.0:
                raise HypothesisError("|1 - q^hp(i)| > 0")
            head = head * (1 + mv / Interval(d))
        self.order0 = _hi(head / (1 - ratio))
        self._plain = None

    def _plain_base(self) -> Interval:
        if self._plain is None:
            t, J = self.t, self.J
            if self.mq > 2.0 / 3.0:
                raise HypothesisError("|q| <= 2/3 for derivative tails", f"|q| <= {self.mq:.6g}")
            if self.mv > 1.5:
                raise HypothesisError("|v| <= 3/2 for derivative tails", f"|v| <= {self.mv:.6g}")
            five_sixths_hp = _exp_bound(_FIVE_SIXTHS_LN * hp(t, J))
            ratio = _exp_bound(_FIVE_SIXTHS_LN * (t ** J)) * (1 + _FIVE_THIRDS / (1 - five_sixths_hp))
            if ratio.hi >= 1.0:
                raise TruncationError(
                    "derivative tail ratio (depths) < 1", f"ratio = {ratio.hi:.3g} at J={J}; increase J"
                )
            base = _FIVE_THIRDS / (_exp_bound(_SIX_FIFTHS_LN * hp(t, J)) - 1)
            for i in range(1, J):
                base = base * (1 + _FIVE_THIRDS / (1 - _exp_bound(_FIVE_SIXTHS_LN * hp(t, i))))
            self._plain = base / (1 - ratio)
        return self._plain

    def bound(self, order: DerivOrder) -> float:
        if order.beta:
            raise ValueError("the depth denominator has u pinned to 1; beta must be 0")
        if order.total == 0:
            return self.order0
        base = self._plain_base()
        total = Interval(0.0)
        for a in range(order.alpha + 1):
            for c in range(order.gamma + 1):
                s = _stirling2(order.alpha, a) * _stirling2(order.gamma, c)
                if not s:
                    continue
                if a + c == 0:
                    partial = Interval(self.order0)
                else:
                    partial = Interval(float(_factorial(a) * _factorial(c))) * Interval(6.0) ** (a + c) * base
                total = total + s * Interval(self.mq) ** a * Interval(self.mv) ** c * partial
        return total.hi


# ----------------------------------------------------------------------
# finite sums
# ----------------------------------------------------------------------
def _b_finite(t: int, xs: Sequence[Box], w: Box, J: int, derivatives: bool) -> PhiJet:
    total = PhiJet.constant(ZERO)
    product = PhiJet.constant(ONE)
    for j in range(1, J):
        f0, f1, f2, _ = _log_geometric(xs[j - 1])
        factor = PhiJet.from_derivatives(f0, f1, f2, (hp(t, j), t ** j, 0), derivatives)
        product = product * factor
        term = PhiJet.monomial(w ** j, (0, 0, j), derivatives) * product
        total = total + term if j % 2 else total - term
    return total


def b_jet(t: int, q, u, w, J: Optional[int] = None, derivatives: bool = True) -> JetEvaluation:
    """Phi-jet of b(q,u,1,w) truncated before term J, with its tail bounds."""
    J = _check_truncation(t, J)
    q, u, w = _as_box(q), _as_box(u), _as_box(w)
    tail = _UWTail(t, q, u, w, J, _x_boxes(t, q, u, J), _is_exact_one(u))
    jet = _b_finite(t, _x_boxes(t, q, u, J), w, J, derivatives)
    return JetEvaluation(jet, tail.bound, J)


def eval_b(t: int, q, u, w, deriv: DerivOrder = VALUE, J: Optional[int] = None) -> CertifiedValue:
    """Phi_q^alpha Phi_u^beta Phi_w^gamma b(q,u,1,w) with a certified tail."""
    deriv = DerivOrder(*deriv).validate()
    return b_jet(t, q, u, w, J, derivatives=deriv.total > 0).value(deriv)


def height_tail_j2(t: int, q, w) -> float:
    """
    Bound on |D(q,w) - D_2(q,w)| with D_2 = 1 - w q/(1-q), written in z = 1/q;
    returns inf outside its domain |w| < |z|^(1+t+t^2) - 1.
    """
    q, w = _as_box(q), _as_box(w)
    mq, mw = q.mag(), Interval(w.mag())
    if mq == 0.0:
        return 0.0
    z_low = 1 / Interval(mq)
    gap = (1 - q).mig()
    if gap <= 0.0:
        return math.inf
    z_minus_one = Interval(gap) / Interval(mq)
    outer = z_low ** (1 + t + t * t) - 1
    if outer.lo <= mw.hi:
        return math.inf
    inner = z_low ** (1 + t) - 1
    if inner.lo <= 0.0:
        return math.inf
    bound = mw * mw / (z_minus_one * inner) / (1 - mw / outer)
    return bound.hi


def eval_D_height(t: int, q, w, deriv: DerivOrder = VALUE, J: Optional[int] = None) -> CertifiedValue:
    """D(q,w) = 1 - b(q,1,1,w) and its Phi-derivatives in (q, w)."""
    deriv = DerivOrder(*deriv).validate()
    if deriv.beta:
        raise ValueError("the height denominator has u pinned to 1; beta must be 0")
    b = eval_b(t, q, ONE, w, deriv, J)
    if deriv.total:
        return CertifiedValue(-b.enclosure, b.tail_bound, b.J)
    tail = b.tail_bound
    if b.J == 2:
        tail = min(tail, height_tail_j2(t, q, w))
    return CertifiedValue(1 - b.enclosure, tail, b.J)


def _depths_finite(t: int, ys: Sequence[Box], v: Box, J: int, derivatives: bool) -> PhiJet:
    total = PhiJet.constant(ZERO)
    running = PhiJet.constant(ONE)
    v_jet = PhiJet.monomial(v, (0, 0, 1), derivatives)
    for j in range(1, J):
        f0, f1, f2, inverse = _log_geometric(ys[j - 1])
        exponents = (hp(t, j), 0, 0)
        ratio = PhiJet.from_derivatives(f0, f1, f2, exponents, derivatives)
        total = total + v_jet * ratio * running
        # 1/(1-y) has the same Phi-derivatives as y/(1-y)
        reciprocal = PhiJet.from_derivatives(inverse, f1, f2, exponents, derivatives)
        running = running * (PhiJet.constant(ONE) - v_jet * reciprocal)
    return total


def depths_jet(t: int, q, v, J: Optional[int] = None, derivatives: bool = True) -> JetEvaluation:
    """Phi-jet of b(q,1,v,1) in (q, v), v in the third slot."""
    J = _check_truncation(t, J)
    q, v = _as_box(q), _as_box(v)
    ys = _x_boxes(t, q, ONE, J)
    tail = _VTail(t, q, v, J, ys)
    return JetEvaluation(_depths_finite(t, ys, v, J, derivatives), tail.bound, J)


def eval_D_depths(t: int, q, v, deriv: DerivOrder = VALUE, J: Optional[int] = None) -> CertifiedValue:
    """D(q,v) = 1 - b(q,1,v,1) and its Phi-derivatives in (q, v)."""
    deriv = DerivOrder(*deriv).validate()
    if deriv.beta:
        raise ValueError("the depth denominator has u pinned to 1; beta must be 0")
    value = depths_jet(t, q, v, J, derivatives=deriv.total > 0).value(deriv)
    if deriv.total:
        return CertifiedValue(-value.enclosure, value.tail_bound, value.J)
    return CertifiedValue(1 - value.enclosure, value.tail_bound, value.J)


def denominator_jet(t: int, mode: str, q, s, J: Optional[int] = None, derivatives: bool = True) -> JetEvaluation:
    """Jet of the numerator-free part b for the height (s = w) or depth (s = v) denominator."""
    if mode == "height":
        return b_jet(t, q, ONE, s, J, derivatives)
    if mode == "depths":
        return depths_jet(t, q, s, J, derivatives)
    raise ValueError(f"unknown denominator mode {mode!r}")


def eval_denominator(t: int, mode: str, q, s, deriv: DerivOrder = VALUE, J: Optional[int] = None) -> CertifiedValue:
    if mode == "height":
        return eval_D_height(t, q, s, deriv, J)
    if mode == "depths":
        return eval_D_depths(t, q, s, deriv, J)
    raise ValueError(f"unknown denominator mode {mode!r}")


def shifted_u_jet(t: int, q, j: int, J: Optional[int] = None) -> JetEvaluation:
    """Jet of b(q,u,1,w) at u = q^hp(j), w = 1, with u an independent slot."""
    q = _as_box(q)
    u = ONE if j == 0 else q ** hp(t, j)
    return b_jet(t, q, u, ONE, J)


def eval_b_at_shifted_u(t: int, q, j: int, deriv: DerivOrder = VALUE, J: Optional[int] = None) -> CertifiedValue:
    """(Phi b)(q, q^hp(j), 1): derivatives act on the slots of b before the shift."""
    if j < 0:
        raise ValueError("level index must be non-negative")
    return shifted_u_jet(t, q, j, J).value(deriv)


def eval_a(t: int, q, J: Optional[int] = None) -> CertifiedValue:
    """a(q,1,1,1) = sum_{j>=0} (-1)^j q^hp(j) P_j(q,1) truncated before term J."""
    J = _check_truncation(t, J)
    q = _as_box(q)
    xs = _x_boxes(t, q, ONE, J)
    total: Box = ONE
    product: Box = ONE
    for j in range(1, J):
        x = xs[j - 1]
        product = product * x / (1 - x)
        term = q ** hp(t, j) * product
        total = total - term if j % 2 else total + term
    tail = _UWTail(t, q, ONE, ONE, J, xs, True)
    bound = _mag_power(q.mag(), hp(t, J)) * Interval(tail.head) / (1 - Interval(tail.ratio))
    return CertifiedValue(total, bound.hi, J)


# ----------------------------------------------------------------------
# floating-point evaluation for Newton steps
# ----------------------------------------------------------------------
def approx_denominator(t: int, mode: str, q: complex, s: complex, J: int) -> Tuple[complex, complex]:
    """Plain complex D(q,s) and dD/dq, uncertified."""
    q, s = complex(q), complex(s)
    if mode == "height":
        total, total_q = 0j, 0j
        product, log_q = 1 + 0j, 0j
        x = q
        for j in range(1, J):
            if j > 1:
                x = q * x ** t
            product *= x / (1 - x)
            log_q += hp(t, j) / (1 - x)
            term = s ** j * product
            sign = 1 if j % 2 else -1
            total += sign * term
            total_q += sign * term * log_q
        return 1 - total, -total_q / q
    total, total_q = 0j, 0j
    running, running_q = 1 + 0j, 0j
    y = q
    for j in range(1, J):
        if j > 1:
            y = q * y ** t
        e = hp(t, j)
        inverse = 1 / (1 - y)
        ratio = y * inverse
        ratio_q = e * ratio * inverse
        total += s * (ratio * running)
        total_q += s * (ratio_q * running + ratio * running_q)
        factor = 1 - s * inverse
        factor_q = -s * e * y * inverse * inverse
        running, running_q = running * factor, running_q * factor + running * factor_q
    return 1 - total, -total_q / q
