"""
Certified check that |q0(e^{i phi})| has its unique minimum at phi = 0, where
q0(w) is the root of D(q, w) = 0 continued from the real singularity q0(1).

The scan has two phases. Near 0 the second derivative of |q0(e^{i phi})|^2 is
certified positive cell by cell, marching outwards and halving the step on
failure. The rest of (0, pi] is bisected; a cell passes when D(., w) has no
zero in the closed disk |q| <= q0 for every w on its arc, or, far from 0, by
the explicit root bound |q| > 1/(2 - 2^-t).
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from pydantic import BaseModel

from canontree.services import genfun
from canontree.services.asymptotics import SingularityCert, solve_q0
from canontree.services.genfun import DerivOrder
from canontree.services.model import check_arity
from canontree.utils import config
from canontree.utils.errors import CanonTreeError, CertificationError
from canontree.utils.interval import PI_HI, ComplexBox, Interval, unit_circle_point

logger = logging.getLogger(__name__)

MODES = ("height", "depths")

_Q = DerivOrder(1, 0, 0)
_S = DerivOrder(0, 0, 1)
_QQ = DerivOrder(2, 0, 0)
_SS = DerivOrder(0, 0, 2)
_QS = DerivOrder(1, 0, 1)

_NEWTON_STEPS = 60
_COVER_LEVELS = 12
_CENTRAL_START = 16


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected height or depths")
    return mode


def _newton(t: int, mode: str, guess: complex, w: complex, J: int) -> complex:
    q = complex(guess)
    for _ in range(_NEWTON_STEPS):
        value, slope = genfun.approx_denominator(t, mode, q, w, J)
        if slope == 0:
            break
        step = value / slope
        q -= step
        if abs(step) < 1e-16:
            break
    return q


def q0_of_w(
    t: int,
    phi: Interval,
    cert: SingularityCert,
    mode: str = "height",
    guess: Optional[complex] = None,
    J: Optional[int] = None,
) -> ComplexBox:
    """
    Box holding, for every w = e^{i phi} with phi in the interval, exactly one
    root of D(., w). With F = D(., w) and q_c a Newton approximation, the disk
    |q - q_c| <= r qualifies when |F_q(q_c)| r > |F(q_c)| + sup|F_qq| r^2/2.
    """
    _check_mode(mode)
    if not isinstance(phi, Interval):
        phi = Interval.point(phi)
    J = J or cert.J_used
    w_box = unit_circle_point(phi)
    center = _newton(t, mode, cert.q0.mid() if guess is None else guess, cmath.exp(1j * phi.mid()), J)
    center_box = ComplexBox.from_complex(center)
    jet = genfun.denominator_jet(t, mode, center_box, w_box, J)
    # D = 1 - b; signs drop out of the magnitudes below
    residual = (1 - jet.value().enclosure).inflate(jet.tail()).mag()
    slope = (jet.inflated(_Q) / center_box).mig()
    if slope <= 0.0:
        raise CertificationError(f"dD/dq is not bounded away from 0 near {center} for phi in {phi}")
    radius = 2.0 * residual / slope + 1e-15
    for _ in range(6):
        box = ComplexBox.around(center, radius)
        disk = genfun.denominator_jet(t, mode, box, w_box, J)
        curvature = ((disk.inflated(_QQ) - disk.inflated(_Q)) / (box * box)).mag()
        if slope * radius > residual + curvature * radius * radius / 2:
            return box
        radius *= 2.0
    raise CertificationError(f"root of D(., w) not isolated for phi in {phi}; shrink the step")


@dataclass(frozen=True)
class ImplicitDerivs:
    """q0(w), q0'(w) and q0''(w) for w on an arc, by implicit differentiation."""

    q0w: ComplexBox
    q0w_prime: ComplexBox
    q0w_doubleprime: ComplexBox
    w: ComplexBox


def implicit_derivatives(
    t: int,
    phi: Interval,
    cert: SingularityCert,
    mode: str = "height",
    guess: Optional[complex] = None,
    J: Optional[int] = None,
) -> ImplicitDerivs:
    J = J or cert.J_used
    q = q0_of_w(t, phi, cert, mode, guess, J)
    w = unit_circle_point(phi if isinstance(phi, Interval) else Interval.point(phi))
    jet = genfun.denominator_jet(t, mode, q, w, J)
    b_q, b_s = jet.inflated(_Q), jet.inflated(_S)
    d_q = b_q / q
    d_s = b_s / w
    d_qq = (jet.inflated(_QQ) - b_q) / (q * q)
    d_ss = (jet.inflated(_SS) - b_s) / (w * w)
    d_qs = jet.inflated(_QS) / (q * w)
    first = -d_s / d_q
    second = (2 * d_qs * d_s * d_q - d_qq * d_s * d_s - d_ss * d_q * d_q) / (d_q * d_q * d_q)
    return ImplicitDerivs(q, first, second, w)


def _times_i(z: ComplexBox) -> ComplexBox:
    return ComplexBox(-z.im, z.re)


def second_derivative_abs(
    t: int,
    phi: Interval,
    cert: SingularityCert,
    mode: str = "height",
    guess: Optional[complex] = None,
    J: Optional[int] = None,
) -> Interval:
    """d^2/dphi^2 |q0(e^{i phi})|^2 = 2 (x'^2 + y'^2 + x x'' + y y'') on the arc."""
    return _curvature(implicit_derivatives(t, phi, cert, mode, guess, J))


def _curvature(derivs: ImplicitDerivs) -> Interval:
    w = derivs.w
    velocity = _times_i(w * derivs.q0w_prime)
    acceleration = -(w * derivs.q0w_prime) - w * w * derivs.q0w_doubleprime
    x, y = derivs.q0w.re, derivs.q0w.im
    total = velocity.re.sqr() + velocity.im.sqr() + x * acceleration.re + y * acceleration.im
    return 2 * total


# ----------------------------------------------------------------------
# outer region
# ----------------------------------------------------------------------
def root_bound_threshold(t: int, mode: str) -> float:
    """Upper bound of the angle beyond which every root has |q| > 1/(2 - 2^-t)."""
    scale = Interval(2.0) ** t
    if mode == "height":
        angle = (Interval(97.0) / 96).sqrt() * Interval(math.pi, PI_HI) / scale.sqrt()
    else:
        angle = 2 * Interval(math.pi, PI_HI) / scale.sqrt()
    return angle.hi


def root_bound(t: int) -> Interval:
    return 1 / (2 - 1 / Interval(2.0) ** t)


def _disk_radius(cert: SingularityCert) -> float:
    return math.nextafter(cert.q0.hi, math.inf)


def disk_free_of_zeros(t: int, mode: str, w: ComplexBox, radius: float, J: int, levels: int = _COVER_LEVELS) -> bool:
    """Quad-tree cover of |q| <= radius by boxes on which D(., w) is certified nonzero."""
    square = Interval(-radius, radius)
    stack: List[Tuple[ComplexBox, int]] = [(ComplexBox(square, square), 0)]
    while stack:
        box, level = stack.pop()
        if box.mig() > radius:
            continue
        try:
            value = genfun.eval_denominator(t, mode, box, w, J=J).inflated()
            clear = not value.contains_zero()
        except (CanonTreeError, ArithmeticError):
            clear = False
        if clear:
            continue
        if level >= levels:
            return False
        re_mid, im_mid = box.re.mid(), box.im.mid()
        for re in (Interval(box.re.lo, re_mid), Interval(re_mid, box.re.hi)):
            for im in (Interval(box.im.lo, im_mid), Interval(im_mid, box.im.hi)):
                stack.append((ComplexBox(re, im), level + 1))
    return True


def outer_cell_certify(
    t: int,
    phi: Interval,
    cert: SingularityCert,
    mode: str = "height",
    J: Optional[int] = None,
    levels: int = _COVER_LEVELS,
) -> Optional[str]:
    """Name of the argument that certifies |q0(e^{i phi})| > q0 on the cell, or None."""
    _check_mode(mode)
    radius = _disk_radius(cert)
    if phi.lo > root_bound_threshold(t, mode) and root_bound(t).lo > radius:
        return "root_bound"
    if disk_free_of_zeros(t, mode, unit_circle_point(phi), radius, J or cert.J_used, levels):
        return "disk_cover"
    return None


# ----------------------------------------------------------------------
# scan
# ----------------------------------------------------------------------
class CellRecord(BaseModel):
    lo: float
    hi: float
    method: str
    lower_modulus: Optional[float] = None
    q_box: Optional[List[float]] = None


class ScanReport(BaseModel):
    t: int
    mode: str
    q0: List[float]
    central_radius: float
    central_cells: List[CellRecord] = []
    outer_cells: List[CellRecord] = []
    status: str = "verified"
    failed_cell: Optional[List[float]] = None

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def covers_half_circle(self) -> bool:
        """Central and outer cells tile [0, pi] with shared endpoints."""
        cells = sorted(self.central_cells + self.outer_cells, key=lambda c: c.lo)
        if not cells or cells[0].lo != 0.0 or cells[-1].hi < math.pi:
            return False
        return all(a.hi == b.lo for a, b in zip(cells, cells[1:]))

    def min_outer_modulus(self) -> Optional[float]:
        bounds = [c.lower_modulus for c in self.outer_cells if c.lower_modulus is not None]
        return min(bounds) if bounds else None


def _central_phase(t: int, mode: str, cert: SingularityCert, J: int, max_depth: int) -> List[CellRecord]:
    cells: List[CellRecord] = []
    start, step = 0.0, PI_HI / _CENTRAL_START
    smallest = PI_HI / 2 ** max_depth
    guess: complex = complex(cert.q0.mid())
    while start < PI_HI and step >= smallest:
        end = min(start + step, PI_HI)
        cell = Interval(start, end)
        try:
            derivs = implicit_derivatives(t, cell, cert, mode, guess, J)
            ok = _curvature(derivs).is_positive()
        except (CanonTreeError, ArithmeticError) as exc:
            logger.debug("t=%d %s: central cell %r failed: %s", t, mode, cell, exc)
            ok = False
        if not ok:
            step /= 2
            continue
        box = derivs.q0w
        guess = box.center()
        cells.append(
            CellRecord(
                lo=start,
                hi=end,
                method="convexity",
                q_box=[box.re.lo, box.re.hi, box.im.lo, box.im.hi],
            )
        )
        start = end
        step *= 2
    return cells


def verify_unique_min(
    t: int,
    mode: str = "height",
    cert: Optional[SingularityCert] = None,
    J: Optional[int] = None,
    max_depth: Optional[int] = None,
    levels: int = _COVER_LEVELS,
) -> ScanReport:
    """Certify that |q0(e^{i phi})| > |q0(1)| for 0 < |phi| <= pi with convexity near 0."""
    check_arity(t)
    _check_mode(mode)
    cert = cert or solve_q0(t, J=J)
    J = J or cert.J_used
    max_depth = max_depth or config.LLL_MAX_DEPTH
    central = _central_phase(t, mode, cert, J, max_depth)
    radius = central[-1].hi if central else 0.0
    report = ScanReport(t=t, mode=mode, q0=[cert.q0.lo, cert.q0.hi], central_radius=radius, central_cells=central)
    if not central:
        report.status = "failed"
        report.failed_cell = [0.0, PI_HI / 2 ** max_depth]
        return report
    logger.info("t=%d %s: convexity certified on [0, %.6g]", t, mode, radius)
    pending: List[Tuple[float, float, int]] = [(radius, PI_HI, 0)] if radius < PI_HI else []
    bound = root_bound(t).lo
    disk = _disk_radius(cert)
    while pending:
        lo, hi, depth = pending.pop(0)
        cell = Interval(lo, hi)
        method = outer_cell_certify(t, cell, cert, mode, J, levels)
        if method is not None:
            modulus = bound if method == "root_bound" else disk
            report.outer_cells.append(CellRecord(lo=lo, hi=hi, method=method, lower_modulus=modulus))
            continue
        if depth >= max_depth:
            report.status = "failed"
            report.failed_cell = [lo, hi]
            logger.warning("t=%d %s: cell [%.6g, %.6g] not certified", t, mode, lo, hi)
            return report
        mid = lo + (hi - lo) / 2
        pending[:0] = [(lo, mid, depth + 1), (mid, hi, depth + 1)]
    report.outer_cells.sort(key=lambda c: c.lo)
    logger.info("t=%d %s: %d outer cells certified", t, mode, len(report.outer_cells))
    return report
