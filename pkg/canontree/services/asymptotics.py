"""
Certified dominant singularity q0 of 1/(1 - b(q,1,1,1)) and the asymptotic
constants of height, distinct depths, last-level leaves, width and total path
length, all as interval enclosures.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from canontree.services import genfun
from canontree.services.genfun import DerivOrder, JetEvaluation
from canontree.services.model import check_arity
from canontree.services.series import hp, p_table
from canontree.utils import config, tables
from canontree.utils.errors import CertificationError, TruncationError, VerificationFailure
from canontree.utils.interval import ONE, ZERO, Interval
from canontree.utils.output import interval_dict

logger = logging.getLogger(__name__)

# bracket holding q0 for every t >= 2
_BRACKET = (0.5, 0.6)
_MAX_BISECTIONS = 200

Q = DerivOrder(1, 0, 0)
U = DerivOrder(0, 1, 0)
W = DerivOrder(0, 0, 1)
QQ = DerivOrder(2, 0, 0)
UU = DerivOrder(0, 2, 0)
WW = DerivOrder(0, 0, 2)
QU = DerivOrder(1, 1, 0)
QW = DerivOrder(1, 0, 1)
UW = DerivOrder(0, 1, 1)


@dataclass(frozen=True)
class SingularityCert:
    """
    q0 enclosure for arity t. D = 1 - b(q,1,1,1) is certified positive at
    q0.lo, negative at q0.hi, and Phi_q D is certified negative on the whole
    enclosure, so exactly one simple zero lies inside.
    """

    t: int
    q0: Interval
    J_used: int
    d_at_lo: Interval
    d_at_hi: Interval
    phi_q_d: Interval
    steps: int = 0


def _sign(t: int, q: float, J: int) -> int:
    enclosure = genfun.eval_D_height(t, q, ONE, J=J).inflated()
    if enclosure.is_positive():
        return 1
    if enclosure.is_negative():
        return -1
    return 0


def solve_q0(t: int, precision: Optional[float] = None, J: Optional[int] = None) -> SingularityCert:
    """Bisect on the certified sign of D(q, 1) until the bracket is narrower than precision."""
    check_arity(t)
    precision = config.Q0_PRECISION if precision is None else precision
    J = config.default_truncation(t) if J is None else J
    lo, hi = _BRACKET
    if _sign(t, lo, J) != 1 or _sign(t, hi, J) != -1:
        raise CertificationError(f"could not certify the sign change of D on [{lo}, {hi}] for t={t}; increase J")
    steps = 0
    while hi - lo > precision:
        mid = lo + (hi - lo) / 2
        if mid <= lo or mid >= hi:
            break
        sign = _sign(t, mid, J)
        if sign == 0:
            raise CertificationError(
                f"sign of D at q={mid!r} is not certified at J={J} (bracket width {hi - lo:.3g}); increase J"
            )
        if sign > 0:
            lo = mid
        else:
            hi = mid
        steps += 1
        if steps > _MAX_BISECTIONS:
            break
    q0 = Interval(lo, hi)
    derivative = genfun.eval_D_height(t, q0, ONE, Q, J).inflated()
    if not derivative.is_negative():
        raise CertificationError(f"Phi_q D on {q0} is not certified negative; the zero may not be simple")
    cert = SingularityCert(
        t=t,
        q0=q0,
        J_used=J,
        d_at_lo=genfun.eval_D_height(t, lo, ONE, J=J).inflated(),
        d_at_hi=genfun.eval_D_height(t, hi, ONE, J=J).inflated(),
        phi_q_d=derivative,
        steps=steps,
    )
    logger.info("t=%d: q0 in %r after %d bisections (J=%d)", t, q0, steps, J)
    return cert


def _b_jet(cert: SingularityCert, J: Optional[int]) -> JetEvaluation:
    return genfun.b_jet(cert.t, cert.q0, ONE, ONE, J or cert.J_used)


def _require_positive(name: str, value: Interval) -> Interval:
    if not value.is_positive():
        raise CertificationError(f"{name} enclosure {value} is not strictly positive; increase J")
    return value


def _mean_and_variance(jet: JetEvaluation, second: DerivOrder, mixed: DerivOrder, first: DerivOrder, name: str):
    """
    Mean and variance constants of a bivariate denominator 1 - b(q, s):
    mu = B_s/B_q and sigma^2 = (B_qq B_s^2 - 2 B_q B_s B_qs + B_q^2 B_ss) / B_q^3,
    where B are Phi-derivatives of b at (q0, 1).
    """
    bq = jet.inflated(Q)
    bs = jet.inflated(first)
    bqq = jet.inflated(QQ)
    bss = jet.inflated(second)
    bqs = jet.inflated(mixed)
    if not bq.is_positive():
        raise CertificationError(f"Phi_q b at q0 is not certified positive ({bq})")
    mu = bs / bq
    sigma2 = (bqq * bs.sqr() - 2 * bq * bs * bqs + bq.sqr() * bss) / bq ** 3
    return mu, _require_positive(f"sigma^2_{name}", sigma2)


def constants_height(t: int, cert: SingularityCert, J: Optional[int] = None) -> Tuple[Interval, Interval]:
    return _mean_and_variance(_b_jet(cert, J), WW, QW, W, "h")


def constants_depths(t: int, cert: SingularityCert, J: Optional[int] = None) -> Tuple[Interval, Interval]:
    jet = genfun.depths_jet(t, cert.q0, ONE, J or cert.J_used)
    return _mean_and_variance(jet, WW, QW, W, "d")


def constants_m(t: int, cert: SingularityCert, J: Optional[int] = None) -> Tuple[Interval, Interval]:
    """The limit law of m has generating function b(q0, u); b(q0, 1) = 1."""
    jet = _b_jet(cert, J)
    mu = jet.inflated(U)
    sigma2 = jet.inflated(UU) - mu.sqr()
    return mu, _require_positive("sigma^2_m", sigma2)


def constant_width(t: int, cert: SingularityCert) -> Interval:
    return -1 / ((t - 1) * cert.q0.ln())


def nu1(t: int, cert: SingularityCert, J: Optional[int] = None) -> Interval:
    """nu(1) = a(q0,1,1,1) / (Phi_q b)(q0,1,1)."""
    numerator = genfun.eval_a(t, cert.q0, J or cert.J_used).inflated()
    return numerator / _b_jet(cert, J).inflated(Q)


def predicted_count(t: int, n: int, cert: Optional[SingularityCert] = None, J: Optional[int] = None) -> Interval:
    """nu(1) / q0^n, the main term of the number of trees of size n."""
    cert = cert or solve_q0(t, J=J)
    return nu1(t, cert, J) / cert.q0 ** n


def growth_constant(t: int, cert: SingularityCert, J: Optional[int] = None) -> Interval:
    """R in count ~ R rho^(n+1) with rho = 1/q0, i.e. R = nu(1) q0."""
    return nu1(t, cert, J) * cert.q0


# ----------------------------------------------------------------------
# alternating sums over shifted u for the path length variance
# ----------------------------------------------------------------------
class SigmaWeight(str, enum.Enum):
    ONE = "1"
    INDEX = "j"
    HP = "hp(j)"
    HP_NEXT = "hp(j+1)"
    TWICE_HP_NEXT_MINUS_ONE = "2hp(j+1)-1"
    LOG_SUM = "sum hp(i)/(1-q^hp(i))"
    T_LOG_SUM = "t sum hp(i)/(1-q^hp(i))"
    TWO_T_LOG_SUM = "2t sum hp(i)/(1-q^hp(i))"


class SigmaOperator(str, enum.Enum):
    U = "Phi_u"
    UU = "Phi_u^2"
    QU = "Phi_q Phi_u"
    UW = "Phi_u Phi_w"

    @property
    def order(self) -> DerivOrder:
        return {"Phi_u": U, "Phi_u^2": UU, "Phi_q Phi_u": QU, "Phi_u Phi_w": UW}[self.value]


class SigmaSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    weight: SigmaWeight
    operator: SigmaOperator


SUPPORTED_SIGMAS = frozenset(
    SigmaSpec(weight=w, operator=o)
    for w, o in [
        (SigmaWeight.ONE, SigmaOperator.U),
        (SigmaWeight.ONE, SigmaOperator.UU),
        (SigmaWeight.ONE, SigmaOperator.QU),
        (SigmaWeight.ONE, SigmaOperator.UW),
        (SigmaWeight.INDEX, SigmaOperator.U),
        (SigmaWeight.HP, SigmaOperator.UU),
        (SigmaWeight.HP_NEXT, SigmaOperator.UU),
        (SigmaWeight.TWICE_HP_NEXT_MINUS_ONE, SigmaOperator.UU),
        (SigmaWeight.LOG_SUM, SigmaOperator.U),
        (SigmaWeight.T_LOG_SUM, SigmaOperator.U),
        (SigmaWeight.TWO_T_LOG_SUM, SigmaOperator.U),
    ]
)


def _weight_value(spec: SigmaSpec, t: int, j: int, log_sum: Interval) -> Interval:
    weight = spec.weight
    if weight is SigmaWeight.ONE:
        return ONE
    if weight is SigmaWeight.INDEX:
        return Interval.point(j)
    if weight is SigmaWeight.HP:
        return Interval.point(hp(t, j))
    if weight is SigmaWeight.HP_NEXT:
        return Interval.point(hp(t, j + 1))
    if weight is SigmaWeight.TWICE_HP_NEXT_MINUS_ONE:
        return Interval.point(2 * hp(t, j + 1) - 1)
    if weight is SigmaWeight.LOG_SUM:
        return log_sum
    if weight is SigmaWeight.T_LOG_SUM:
        return t * log_sum
    return (2 * t) * log_sum


def _majorant_sum(spec: SigmaSpec, t: int, J: int, ratio: Interval, q0: Interval) -> Interval:
    """sum_{j>=J} M_j ratio^(j-J) for an upper bound M_j of the weight."""
    weight = spec.weight
    if weight is SigmaWeight.ONE:
        return 1 / (1 - ratio)
    if weight is SigmaWeight.INDEX:
        return J / (1 - ratio) + ratio / (1 - ratio).sqr()
    growth = t * ratio
    if growth.hi >= 1.0:
        raise TruncationError("t Q < 1 for the weighted tail", f"t Q = {growth.hi:.3g} at J={J}; increase J_sigma")
    power = Interval.point(t) ** J
    lead = {
        SigmaWeight.HP: power / (t - 1),
        SigmaWeight.HP_NEXT: power * t / (t - 1),
        SigmaWeight.TWICE_HP_NEXT_MINUS_ONE: 2 * power * t / (t - 1),
        SigmaWeight.LOG_SUM: 2 * power / (1 - q0),
        SigmaWeight.T_LOG_SUM: 2 * power * t / (1 - q0),
        SigmaWeight.TWO_T_LOG_SUM: 4 * power * t / (1 - q0),
    }[weight]
    return lead / (1 - growth)


@dataclass
class SigmaContext:
    """Shared jets for sums over one q0 enclosure."""

    t: int
    q0: Interval
    J_sigma: int
    J_b: int
    _jets: Dict[int, JetEvaluation] = field(default_factory=dict)
    _tail_jet: Optional[JetEvaluation] = None

    def jet(self, j: int) -> JetEvaluation:
        if j not in self._jets:
            self._jets[j] = genfun.shifted_u_jet(self.t, self.q0, j, self.J_b)
        return self._jets[j]

    def tail_jet(self) -> JetEvaluation:
        if self._tail_jet is None:
            reach = (self.q0 ** hp(self.t, self.J_sigma)).hi
            self._tail_jet = genfun.b_jet(self.t, self.q0, Interval(0.0, reach), ONE, self.J_b)
        return self._tail_jet


def sigma_sum(
    t: int,
    q0: Interval,
    spec: SigmaSpec,
    J_sigma: Optional[int] = None,
    J_b: Optional[int] = None,
    context: Optional[SigmaContext] = None,
) -> Interval:
    """
    sum_{j>=0} (-1)^j M(j) (Phi b)(q0, q0^hp(j), 1) prod_{i<=j} q0^hp(i)/(1 - q0^hp(i)),
    summed directly below J_sigma with a geometric bound on the rest.
    """
    if spec not in SUPPORTED_SIGMAS:
        raise ValueError(f"unsupported weighted sum {spec.weight.value} / {spec.operator.value}")
    if context is None:
        J_sigma = J_sigma or config.default_truncation(t)
        context = SigmaContext(t, q0, J_sigma, J_b or config.default_truncation(t))
    J = context.J_sigma
    order = spec.operator.order
    total = ZERO
    product = ONE
    log_sum = ZERO
    for j in range(J):
        if j:
            y = q0 ** hp(t, j)
            product = product * y / (1 - y)
            log_sum = log_sum + hp(t, j) / (1 - y)
        term = _weight_value(spec, t, j, log_sum) * context.jet(j).inflated(order) * product
        total = total - term if j % 2 else total + term
    y_next = (q0 ** hp(t, J + 1)).hi
    if y_next >= 0.5:
        raise TruncationError("Q < 1 for the weighted tail", f"at J_sigma={J}")
    ratio = Interval(y_next) / (1 - Interval(y_next))
    y_last = q0 ** hp(t, J)
    head = product * y_last / (1 - y_last)
    bound = Interval(context.tail_jet().inflated(order).mag()) * head * _majorant_sum(spec, t, J, ratio, q0)
    return total.inflate(bound.hi)


def _sigma(weight: SigmaWeight, operator: SigmaOperator, context: SigmaContext) -> Interval:
    return sigma_sum(context.t, context.q0, SigmaSpec(weight=weight, operator=operator), context=context)


def constants_tpl(
    t: int,
    cert: SingularityCert,
    mu_h: Optional[Interval] = None,
    J_sigma: Optional[int] = None,
    J: Optional[int] = None,
) -> Tuple[Interval, Interval]:
    """mu_tpl = (t/2) mu_h and the cubic-order variance constant."""
    jet = _b_jet(cert, J)
    bq, bqq, bw, bqw, bww = (jet.inflated(o) for o in (Q, QQ, W, QW, WW))
    if mu_h is None:
        mu_h = bw / bq
    mu = mu_h * Fraction(t, 2)
    context = SigmaContext(t, cert.q0, J_sigma or config.default_truncation(t), J or cert.J_used)
    s1 = _sigma(SigmaWeight.ONE, SigmaOperator.U, context)
    s_qu = _sigma(SigmaWeight.ONE, SigmaOperator.QU, context)
    s_hp = _sigma(SigmaWeight.HP, SigmaOperator.UU, context)
    s_log = _sigma(SigmaWeight.LOG_SUM, SigmaOperator.U, context)
    s_hp_next = _sigma(SigmaWeight.TWICE_HP_NEXT_MINUS_ONE, SigmaOperator.UU, context)
    s_2t_log = _sigma(SigmaWeight.TWO_T_LOG_SUM, SigmaOperator.U, context)
    s_uw = _sigma(SigmaWeight.ONE, SigmaOperator.UW, context)
    s_index = _sigma(SigmaWeight.INDEX, SigmaOperator.U, context)
    s1_sq = s1.sqr()
    bw_sq = bw.sqr()
    sigma2 = (
        bqq * bw_sq / bq ** 5 * s1_sq
        - bqw * bw / bq ** 4 * s1_sq
        - bw_sq / bq ** 4 * s1 * (s_qu + s_hp + s_log)
        + bw_sq / (3 * bq ** 3) * (s_hp_next + s_2t_log)
        + bww / (3 * bq ** 3) * s1_sq
        + bw / (3 * bq ** 3) * s1 * (s_uw + s_index)
    )
    return mu, _require_positive("sigma^2_tpl", sigma2)


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------
CONSTANT_FIELDS = (
    "q0",
    "mu_h",
    "sigma2_h",
    "mu_d",
    "sigma2_d",
    "mu_m",
    "sigma2_m",
    "mu_w",
    "mu_tpl",
    "sigma2_tpl",
    "nu1",
    "R",
)


class ConstantsReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    t: int
    J: int
    J_sigma: int
    q0: Interval
    mu_h: Interval
    sigma2_h: Interval
    mu_d: Interval
    sigma2_d: Interval
    mu_m: Interval
    sigma2_m: Interval
    mu_w: Interval
    mu_tpl: Interval
    sigma2_tpl: Interval
    nu1: Interval
    R: Interval
    p_m: List[Interval] = []

    def value(self, name: str) -> Interval:
        return getattr(self, name)

    def to_json_dict(self) -> dict:
        data = {"t": self.t, "J": self.J, "J_sigma": self.J_sigma}
        for name in CONSTANT_FIELDS:
            data[name] = interval_dict(self.value(name))
        data["p_m"] = [interval_dict(p) for p in self.p_m]
        return data


def compute_constants(
    t: int,
    J: Optional[int] = None,
    J_sigma: Optional[int] = None,
    precision: Optional[float] = None,
    p_terms: int = 12,
) -> ConstantsReport:
    """Every constant for arity t, from one certified q0."""
    check_arity(t)
    J = J or config.default_truncation(t)
    J_sigma = J_sigma or J
    cert = solve_q0(t, precision, J)
    mu_h, sigma2_h = constants_height(t, cert, J)
    mu_d, sigma2_d = constants_depths(t, cert, J)
    mu_m, sigma2_m = constants_m(t, cert, J)
    mu_tpl, sigma2_tpl = constants_tpl(t, cert, mu_h, J_sigma, J)
    nu = nu1(t, cert, J)
    b_at_q0 = genfun.eval_b(t, cert.q0, ONE, ONE, J=J).inflated()
    if not b_at_q0.contains(1):
        raise VerificationFailure("b(q0,1,1,1) = 1", f"enclosure {b_at_q0}")
    report = ConstantsReport(
        t=t,
        J=J,
        J_sigma=J_sigma,
        q0=cert.q0,
        mu_h=mu_h,
        sigma2_h=sigma2_h,
        mu_d=mu_d,
        sigma2_d=sigma2_d,
        mu_m=mu_m,
        sigma2_m=sigma2_m,
        mu_w=constant_width(t, cert),
        mu_tpl=mu_tpl,
        sigma2_tpl=sigma2_tpl,
        nu1=nu,
        R=nu * cert.q0,
        p_m=p_table(t, cert.q0, p_terms) if p_terms else [],
    )
    logger.info("t=%d: constants computed (J=%d, J_sigma=%d)", t, J, J_sigma)
    return report


class TableCheck(BaseModel):
    t: int
    quantity: str
    published: str
    enclosure: str
    ok: bool


def check_tables(report: ConstantsReport) -> List[TableCheck]:
    """Compare a report with the published values for its arity."""
    checks = []
    for name, text in tables.published_values(report.t).items():
        enclosure = report.value(name)
        checks.append(
            TableCheck(
                t=report.t,
                quantity=name,
                published=text,
                enclosure=repr(enclosure),
                ok=tables.reference_interval(text).overlaps(enclosure),
            )
        )
    return checks


class ExpansionCheck(BaseModel):
    t: int
    quantity: str
    window: str
    enclosure: str
    ok: bool


def _expansion_windows(t: int) -> Dict[str, Interval]:
    T = Interval.point(t)
    two_t = Interval.point(2) ** t
    ln2 = Interval(2.0).ln()
    windows = {
        "q0": (
            Interval.point(Fraction(1, 2))
            + 1 / (8 * two_t)
            + (T + 4) / (32 * two_t ** 2)
            + (3 * T.sqr() + 23 * T + 38) / (256 * two_t ** 3),
            Interval.point(Fraction(7, 100)) * T ** 3 / two_t ** 4,
        ),
        "mu_h": (
            Interval.point(Fraction(1, 2))
            + (T - 2) / (8 * two_t)
            + (2 * T.sqr() + 3 * T - 8) / (32 * two_t ** 2)
            + (9 * T ** 3 + 45 * T.sqr() + 2 * T - 88) / (256 * two_t ** 3),
            Interval.point(Fraction(55, 100)) * T ** 4 / two_t ** 4,
        ),
        "sigma2_h": (
            Interval.point(Fraction(1, 4))
            + (-T.sqr() + 5 * T - 2) / (16 * two_t)
            + (-4 * T ** 3 + 4 * T.sqr() + 27 * T - 14) / (64 * two_t ** 2),
            Interval.point(Fraction(26, 100)) * T ** 4 / two_t ** 3,
        ),
        "mu_w": (
            (1 / ln2 + 1 / (4 * two_t * ln2.sqr())) / (t - 1),
            Interval.point(Fraction(2, 10)) * T / two_t ** 2 / (t - 1),
        ),
        # only O(t^2/2^(2t)) is known; 10 dominates the second-order coefficients above
        "R": (
            Interval.point(Fraction(1, 8)) + (T - 2) / (32 * two_t),
            10 * T.sqr() / two_t ** 2,
        ),
    }
    return {name: center.inflate(radius.hi) for name, (center, radius) in windows.items()}


def expansion_checks(report: ConstantsReport) -> List[ExpansionCheck]:
    """Compare a large-t report with the explicit expansions in t and their error windows."""
    if report.t < 10:
        raise ValueError("the expansions in t are stated for t >= 10")
    checks = []
    for name, window in _expansion_windows(report.t).items():
        enclosure = report.value(name)
        checks.append(
            ExpansionCheck(
                t=report.t,
                quantity=name,
                window=repr(window),
                enclosure=repr(enclosure),
                ok=window.overlaps(enclosure),
            )
        )
    return checks
