"""
Width-capped counting through the transfer matrix

    M_K(q) = ( q^r [r/t <= s <= (r+K)/t] )_{1 <= r, s <= N(K)},  N(K) = ceil(K/(t-1)) - 1,

whose resolvent gives W_K(q), the generating function of trees with width at
most K. The singularity q_K of W_K is where the Perron root of M_K(q) is 1.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Deque, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from canontree.services import bigdp
from canontree.services.model import check_arity
from canontree.services.series import SeriesQ, p_table, series_b
from canontree.utils import config
from canontree.utils.errors import CertificationError
from canontree.utils.interval import ZERO, Interval

logger = logging.getLogger(__name__)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class TransferMatrix:
    t: int
    K: int

    @property
    def N(self) -> int:
        return _ceil_div(self.K, self.t - 1) - 1

    def support(self, r: int) -> range:
        """Columns s with a nonzero entry in row r."""
        return range(_ceil_div(r, self.t), min(self.N, (r + self.K) // self.t) + 1)

    def same_entries(self, other: "TransferMatrix") -> bool:
        """True when both caps give the same matrix, and hence the same q_K."""
        return self.N == other.N and all(self.support(r) == other.support(r) for r in range(1, self.N + 1))

    def numeric(self, q: float) -> np.ndarray:
        size = self.N
        matrix = np.zeros((size, size))
        for r in range(1, size + 1):
            cols = self.support(r)
            matrix[r - 1, cols.start - 1 : cols.stop - 1] = q ** r
        return matrix


@dataclass(frozen=True)
class WidthCapSeries:
    t: int
    K: int
    coeffs: Tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n] if 0 <= n < len(self.coeffs) else 0


def width_capped_counts(t: int, K: int, N_max: int) -> WidthCapSeries:
    """Coefficients of W_K(q) up to q^N_max, by iterating W_{K,r} = q[r=1] + q^r sum_s W_{K,s}."""
    check_arity(t)
    if K < 1:
        raise ValueError(f"width cap must be at least 1, got {K}")
    if N_max < 0:
        raise ValueError("N_max must be non-negative")
    if K < t:
        # only the single leaf has width below t
        return WidthCapSeries(t, K, tuple([1] + [0] * N_max))
    matrix = TransferMatrix(t, K)
    # W_{K,r} has valuation r, so rows beyond N_max never contribute
    size = min(matrix.N, N_max)
    supports = [None] + [matrix.support(r) for r in range(1, size + 1)]
    last = min(K // t, size)
    # prefix sums over r of [q^j] W_{K,r} for the last `size` exponents j
    window: Deque[List[int]] = deque([[0] * (size + 1)], maxlen=max(size, 1))
    coeffs = [1] + [0] * N_max
    for n in range(1, N_max + 1):
        pre = [0] * (size + 1)
        acc = 0
        for r in range(1, size + 1):
            if r <= n:
                value = 1 if (r == 1 and n == 1) else 0
                if n - r >= 1:
                    cols = supports[r]
                    hi = min(cols.stop - 1, size)
                    if hi >= cols.start:
                        lower = window[-r]
                        value += lower[hi] - lower[cols.start - 1]
                acc += value
            pre[r] = acc
        window.append(pre)
        coeffs[n] = pre[last]
    return WidthCapSeries(t, K, tuple(coeffs))


def width_distribution(t: int, n: int) -> Dict[int, int]:
    """Number of trees of size n with each width, by differencing over the cap K."""
    check_arity(t)
    if n == 0:
        return {1: 1}
    total = bigdp.count(t, n)
    entries: Dict[int, int] = {}
    previous = 0
    for K in range(1, 1 + n * (t - 1) + 1):
        current = width_capped_counts(t, K, n)[n]
        if current != previous:
            entries[K] = current - previous
        previous = current
        if current == total:
            break
    return entries


class WidthMean(NamedTuple):
    """lower <= E(w) <= upper at size n; caps 0..K were summed exactly."""

    n: int
    lower: Fraction
    upper: Fraction
    K: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def mid(self) -> float:
        return float((self.lower + self.upper) / 2)


def width_mean_bounds(t: int, sizes: Sequence[int], tail: Fraction = Fraction(0)) -> List[WidthMean]:
    """
    E(w) = sum_{K>=0} P(w > K) for every size, one capped-count run per K.

    The sum stops at the first K with (tau - 1 - K) P(w > K) <= tail, which
    bounds the remaining terms since P(w > K) is non-increasing and vanishes
    from K = tau = 1 + n(t-1) on. tail = 0 gives the exact mean.
    """
    check_arity(t)
    sizes = list(sizes)
    if not sizes:
        return []
    for n in sizes:
        bigdp._check_cap("width_mean", n, config.WIDTH_MEAN_CAP)
    if tail < 0:
        raise ValueError("tail must be non-negative")
    totals = {n: bigdp.count(t, n) for n in sizes}
    # K = 0: every tree has a leaf
    sums = {n: Fraction(1) for n in sizes}
    done: Dict[int, WidthMean] = {}
    pending = {n for n in sizes if n > 0}
    for n in sizes:
        if n == 0:
            done[0] = WidthMean(0, Fraction(1), Fraction(1), 0)
    K = 0
    while pending:
        K += 1
        capped = width_capped_counts(t, K, max(pending))
        for n in sorted(pending):
            above = Fraction(totals[n] - capped[n], totals[n])
            sums[n] += above
            remainder = above * (n * (t - 1) - K)
            if remainder <= tail:
                done[n] = WidthMean(n, sums[n], sums[n] + remainder, K)
                pending.discard(n)
        logger.debug("t=%d: width cap %d summed, %d sizes open", t, K, len(pending))
    return [done[n] for n in sizes]


def width_mean(t: int, n: int) -> Fraction:
    """E(w) = sum_{K>=0} (1 - P(w <= K)), exactly."""
    return width_mean_bounds(t, [n])[0].lower


def width_mean_slope(t: int, sizes: Sequence[int], tail: Fraction = Fraction(1, 10 ** 12)) -> float:
    """Least-squares slope of E(w) against ln n."""
    if len(sizes) < 2:
        raise ValueError("the slope needs at least two sizes")
    means = width_mean_bounds(t, sizes, tail)
    logn = np.log(np.array([m.n for m in means], dtype=float))
    slope, _ = np.polyfit(logn, np.array([m.mid() for m in means]), 1)
    return float(slope)


# ----------------------------------------------------------------------
# singularity of W_K
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class QKCert:
    """
    q_K lies in [q_lo, q_hi]: M_K(q_lo) x_lo <= x_lo and M_K(q_hi) x_hi >= x_hi
    for the positive integer vectors x_lo, x_hi, checked in exact arithmetic.
    """

    t: int
    K: int
    qK: Interval
    q_lo: Fraction
    q_hi: Fraction
    x_lo: Tuple[int, ...]
    x_hi: Tuple[int, ...]


# power-iteration budgets tried in turn before a witness is given up
_ITERATION_SCHEDULE = (2000, 20000)
_STALL_LIMIT = 25


def power_iteration(matrix: np.ndarray, start: Optional[np.ndarray] = None, max_iter: int = 2000, tol: float = 1e-15):
    """
    Perron root and vector of a nonnegative primitive matrix. Iterates until the
    entrywise relative residual |Mx - lam x|_r / x_r drops below tol or stops
    improving, so entries many orders of magnitude below the largest one are
    still accurate to a few ulps.
    """
    size = matrix.shape[0]
    x = np.ones(size) if start is None else np.abs(np.array(start, dtype=float))
    x = x / np.max(x)
    lam = 0.0
    best = np.inf
    stalled = 0
    for _ in range(max_iter):
        y = matrix @ x
        peak = float(np.max(y))
        if peak == 0.0:
            break
        lam = float(x @ y) / float(x @ x)
        with np.errstate(divide="ignore", invalid="ignore"):
            residual = float(np.max(np.abs(y - lam * x) / x))
        x = y / peak
        if residual < tol:
            break
        if residual < best:
            best, stalled = residual, 0
        else:
            stalled += 1
            if stalled >= _STALL_LIMIT:
                break
    return lam, x


def _integer_witness(x: np.ndarray) -> Optional[Tuple[int, ...]]:
    """The float vector scaled exactly to integers (every entry keeps all 53 bits)."""
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        return None
    parts = [Fraction(float(v)) for v in x]
    # float denominators are powers of two, so the largest is a common multiple
    scale = max(p.denominator for p in parts)
    return tuple(int(p * scale) for p in parts)


def verify_witness(matrix: TransferMatrix, q: Fraction, x: Sequence[int], upper: bool) -> bool:
    """
    Exact test of M_K(q) x <= x (upper=False) or M_K(q) x >= x (upper=True)
    for a positive vector x; with q = a/d it compares a^r sum_s x_s against x_r d^r.
    """
    if len(x) != matrix.N or any(v <= 0 for v in x):
        return False
    a, d = q.numerator, q.denominator
    prefix = [0]
    for v in x:
        prefix.append(prefix[-1] + v)
    for r in range(1, matrix.N + 1):
        cols = matrix.support(r)
        image = a ** r * (prefix[cols.stop - 1] - prefix[cols.start - 1])
        own = x[r - 1] * d ** r
        if upper and image < own:
            return False
        if not upper and image > own:
            return False
    return True


def _classify(matrix: TransferMatrix, q: Fraction, start: Optional[np.ndarray]):
    """
    (side, witness, vector) at q: side is False when a lower witness proves
    rho(M_K(q)) <= 1, True when an upper one proves rho >= 1, None if neither verified.
    """
    numeric = matrix.numeric(float(q))
    vector = start
    for max_iter in _ITERATION_SCHEDULE:
        lam, vector = power_iteration(numeric, vector, max_iter=max_iter)
        witness = _integer_witness(vector)
        if witness is None:
            continue
        for upper in ((False, True) if lam <= 1.0 else (True, False)):
            if verify_witness(matrix, q, witness, upper=upper):
                return upper, witness, vector
    return None, None, vector


def solve_qK(t: int, K: int, precision: float = 1e-13, lower: float = 0.5) -> QKCert:
    """Bisect on the Perron root of M_K(q) with exactly verified witness vectors."""
    check_arity(t)
    if K < t:
        raise ValueError(f"the transfer matrix is empty for K={K} < t={t}")
    matrix = TransferMatrix(t, K)
    lo, hi = Fraction(lower), Fraction(1)
    side, x_lo, vector = _classify(matrix, lo, None)
    if side is not False:
        raise CertificationError(f"no lower witness at q={float(lo)} for t={t}, K={K}")
    x_hi = tuple([1] * matrix.N)
    if not verify_witness(matrix, hi, x_hi, upper=True):
        raise CertificationError(f"all-ones vector is not an upper witness at q=1 for t={t}, K={K}")
    while hi - lo > precision:
        mid = Fraction((float(lo) + float(hi)) / 2)
        if not lo < mid < hi:
            break
        side, witness, vector = _classify(matrix, mid, vector)
        if side is False:
            lo, x_lo = mid, witness
        elif side is True:
            hi, x_hi = mid, witness
        else:
            # mid sits within rounding noise of q_K: certify a quarter of the target width to either side
            logger.debug("t=%d K=%d: no witness at %r, stepping off by %.3g", t, K, float(mid), precision / 4)
            step = Fraction(precision) / 4
            below = max(lo, Fraction(float(mid - step)))
            above = min(hi, Fraction(float(mid + step)))
            if below > lo:
                side, witness, vector = _classify(matrix, below, vector)
                if side is not False:
                    raise CertificationError(f"no lower witness at q={float(below)!r} for t={t}, K={K}")
                lo, x_lo = below, witness
            if above < hi:
                side, witness, vector = _classify(matrix, above, vector)
                if side is not True:
                    raise CertificationError(f"no upper witness at q={float(above)!r} for t={t}, K={K}")
                hi, x_hi = above, witness
            break
    if hi - lo > precision:
        raise CertificationError(
            f"q_K for t={t}, K={K} enclosed only to width {float(hi - lo):.3g}, asked for {precision:.3g}"
        )
    cert = QKCert(t, K, Interval(float(lo), float(hi)), lo, hi, x_lo, x_hi)
    logger.info("t=%d K=%d: q_K in %r", t, K, cert.qK)
    return cert


def qk_decay_slope(certs: Sequence[QKCert], q0: Interval) -> float:
    """Least-squares slope of ln(q_K - q0) against K."""
    Ks = np.array([c.K for c in certs], dtype=float)
    gaps = np.array([c.qK.mid() - q0.mid() for c in certs])
    if np.any(gaps <= 0):
        raise CertificationError("q_K - q0 must be positive for the slope fit")
    slope, _ = np.polyfit(Ks, np.log(gaps), 1)
    return float(slope)


# ----------------------------------------------------------------------
# cross-checks against the series and the limit law of m
# ----------------------------------------------------------------------
def transfer_determinant_series(t: int, K: int, order: int) -> SeriesQ:
    """det(I - M_K(q)) as an exact power series, by elimination in the series ring."""
    matrix = TransferMatrix(t, K)
    size = matrix.N
    rows: List[List[SeriesQ]] = []
    for r in range(1, size + 1):
        cols = matrix.support(r)
        row = []
        for s in range(1, size + 1):
            entry = SeriesQ.constant(1 if r == s else 0, order)
            if s in cols:
                entry = entry - SeriesQ.monomial(r, order)
            row.append(entry)
        rows.append(row)
    det = SeriesQ.constant(1, order)
    # every pivot keeps constant term 1 since M_K has no constant terms
    for k in range(size):
        pivot = rows[k][k]
        det = det * pivot
        inverse = pivot.reciprocal()
        for i in range(k + 1, size):
            if not any(rows[i][k].coeffs):
                continue
            factor = rows[i][k] * inverse
            for j in range(k, size):
                rows[i][j] = rows[i][j] - factor * rows[k][j]
    return det


def determinant_agreement(t: int, K: int, order: int) -> int:
    """First exponent where det(I - M_K) and 1 - b(q,1,1,1) differ (order+1 if none)."""
    det = transfer_determinant_series(t, K, order)
    reference = 1 - series_b(t, order)
    return (det - reference).valuation()


class EigenResidual(NamedTuple):
    r: int
    residual: Interval
    bound: float
    ok: bool


def eigenvector_residuals(t: int, K: int, q0: Interval, p: Optional[List[Interval]] = None) -> List[EigenResidual]:
    """
    Row residuals p_r - q0^r sum_{s in row r} p_s of the truncated p-vector.
    Truncation drops q0^r sum_{s > last column} p_s, which lies in
    [0, q0^(r + last + 1)/(1 - q0)] because 0 <= p_s <= q0^s.
    """
    matrix = TransferMatrix(t, K)
    size = matrix.N
    p = p if p is not None else p_table(t, q0, size)
    prefix = [ZERO]
    for value in p[:size]:
        prefix.append(prefix[-1] + value)
    out = []
    for r in range(1, size + 1):
        cols = matrix.support(r)
        image = q0 ** r * (prefix[cols.stop - 1] - prefix[cols.start - 1])
        residual = p[r - 1] - image
        last = cols.stop - 1
        bound = (Interval(q0.hi) ** (r + last + 1) / (1 - Interval(q0.hi))).hi
        out.append(EigenResidual(r, residual, bound, residual.overlaps(Interval(0.0, bound))))
    return out
