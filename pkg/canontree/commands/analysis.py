"""Certified-analysis commands: constants, compare, qk, verify."""

from __future__ import annotations

import asyncio
import json
import logging
import math
from collections import Counter
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

from canontree.commands.common import (
    CommandResponse,
    RunConfig,
    add_common_arguments,
    emit,
    parse_int_list,
    render,
    run_jobs,
)
from canontree.services import asymptotics, bigdp, locallimit, model, series, width
from canontree.services.asymptotics import CONSTANT_FIELDS, SingularityCert
from canontree.utils import config
from canontree.utils.errors import CanonTreeError, CertificationError
from canontree.utils.output import decimal_string, interval_cell

logger = logging.getLogger(__name__)

COMPARE_COLUMNS = ["value", "exact_probability", "asymptotic_density"]
# p_m <= q0^m is below 1e-15 past this index for every t
_P_TERMS_CAP = 80


# ----------------------------------------------------------------------
# constants
# ----------------------------------------------------------------------
def constants_frame(reports: List[asymptotics.ConstantsReport], fmt: str) -> pd.DataFrame:
    rows = []
    for report in reports:
        row: Dict[str, object] = {"t": report.t, "J": report.J, "J_sigma": report.J_sigma}
        for name in CONSTANT_FIELDS:
            value = report.value(name)
            if fmt == "table":
                row[name] = interval_cell(value)
            else:
                row[f"{name}_lo"] = f"{value.lo:.17g}"
                row[f"{name}_hi"] = f"{value.hi:.17g}"
        rows.append(row)
    return pd.DataFrame(rows)


async def constants(request: RunConfig) -> CommandResponse:
    """Certified constants per arity, optionally checked against the published tables."""
    try:
        reports = await run_jobs(
            lambda t: asymptotics.compute_constants(t, request.J, request.J_sigma, request.precision),
            request.t,
        )
        checks = [c for r in reports for c in asymptotics.check_tables(r)] if request.check_tables else []
        expansions = []
        if request.check_expansions:
            for report in reports:
                if report.t < 10:
                    logger.warning("t=%d: no expansion check below t=10", report.t)
                    continue
                expansions.extend(asymptotics.expansion_checks(report))
        if request.fmt == "json":
            payload = {
                "reports": [r.to_json_dict() for r in reports],
                "table_checks": [c.model_dump() for c in checks],
                "expansion_checks": [c.model_dump() for c in expansions],
            }
            text = emit(json.dumps(payload, indent=2) + "\n", request.output)
        else:
            frame = constants_frame(reports, request.fmt)
            if checks and request.fmt == "csv":
                frame = pd.DataFrame([c.model_dump() for c in checks + expansions])
            text = render(frame, request)
            if (checks or expansions) and request.fmt == "table" and not request.output:
                text += "\n" + pd.DataFrame([c.model_dump() for c in checks + expansions]).to_string(index=False) + "\n"
        failed = [c for c in checks + expansions if not c.ok]
        if failed:
            names = ", ".join(f"t={c.t} {c.quantity}" for c in failed)
            return CommandResponse(command="constants", output=text, status="failed", error=f"outside enclosure: {names}")
        return CommandResponse(command="constants", output=text)
    except CanonTreeError as e:
        return CommandResponse(command="constants", status="error", error=str(e))


# ----------------------------------------------------------------------
# exact distribution against the limit law
# ----------------------------------------------------------------------
class LimitLaw(NamedTuple):
    mean: float
    variance: float
    step: int


def limit_law(t: int, n: int, stat: str, cert: SingularityCert, J: Optional[int] = None, J_sigma: Optional[int] = None) -> LimitLaw:
    """Main terms of mean and variance of the normal approximation at size n."""
    if stat == "height":
        mu, sigma2 = asymptotics.constants_height(t, cert, J)
        return LimitLaw(mu.mid() * n, sigma2.mid() * n, 1)
    if stat == "distinct_depths":
        mu, sigma2 = asymptotics.constants_depths(t, cert, J)
        return LimitLaw(mu.mid() * n, sigma2.mid() * n, 1)
    if stat == "total_path_length":
        mu, sigma2 = asymptotics.constants_tpl(t, cert, J_sigma=J_sigma, J=J)
        # every path length is a multiple of t
        return LimitLaw(mu.mid() * n * n, sigma2.mid() * n ** 3, t)
    raise ValueError(f"no normal limit law for {stat}")


def compare_frame(t: int, n: int, stat: str, J: Optional[int] = None, J_sigma: Optional[int] = None) -> pd.DataFrame:
    """Exact probabilities next to the discretised normal density (or p_m for the last level)."""
    if stat == "width":
        raise ValueError("width has no limit distribution to compare with; use moments")
    table = bigdp.dist(t, n, stat)
    cert = asymptotics.solve_q0(t, J=J)
    values = sorted(table.entries)
    digits = config.PROB_DIGITS
    exact = [decimal_string(table.probability(v), digits) for v in values]
    if stat == "last_level_leaves":
        M = min(max(values) // t, _P_TERMS_CAP)
        p = series.p_table(t, cert.q0, M) if M >= 1 else []
        asymptotic = [
            f"{p[v // t - 1].mid():.{digits}f}" if v % t == 0 and 1 <= v // t <= len(p) else "" for v in values
        ]
    elif n == 0:
        asymptotic = [""] * len(values)
    else:
        law = limit_law(t, n, stat, cert, J, J_sigma)
        x = np.array(values, dtype=float)
        density = law.step * np.exp(-((x - law.mean) ** 2) / (2 * law.variance)) / math.sqrt(2 * math.pi * law.variance)
        asymptotic = [f"{d:.{digits}f}" for d in density]
    return pd.DataFrame(
        {"value": values, "exact_probability": exact, "asymptotic_density": asymptotic},
        columns=COMPARE_COLUMNS,
    )


def sup_distance(frame: pd.DataFrame) -> float:
    """Largest |exact - asymptotic| over the rows that carry both."""
    rows = frame[frame["asymptotic_density"] != ""]
    if rows.empty:
        return 0.0
    diff = rows["exact_probability"].astype(float) - rows["asymptotic_density"].astype(float)
    return float(np.max(np.abs(diff)))


def ks_distance(table: bigdp.DistTable) -> float:
    """Kolmogorov distance between the standardised exact law and N(0, 1)."""
    m = table.moments()
    if m.variance == 0:
        raise ValueError(f"{table.stat_name} is constant at n={table.n}")
    sd = math.sqrt(float(m.variance))
    cdf = Fraction(0)
    worst = 0.0
    for value, p in table.probabilities().items():
        z = float(value - m.mean) / sd
        normal = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
        # the exact cdf jumps at value; compare on both sides of the jump
        worst = max(worst, abs(float(cdf) - normal))
        cdf += p
        worst = max(worst, abs(float(cdf) - normal))
    return worst


async def compare(request: RunConfig) -> CommandResponse:
    try:
        t, n = request.single("t"), request.single("n")
        frame = await asyncio.to_thread(compare_frame, t, n, request.stat, request.J, request.J_sigma)
        logger.info("t=%d n=%d %s: sup distance %.3g", t, n, request.stat, sup_distance(frame))
        return CommandResponse(command="compare", output=render(frame, request))
    except (CanonTreeError, ValueError) as e:
        return CommandResponse(command="compare", status="error", error=str(e))


# ----------------------------------------------------------------------
# singularities of the width-capped series
# ----------------------------------------------------------------------
class QKEntry(BaseModel):
    K: int
    lo: float
    hi: float
    gap: float


class QKReport(BaseModel):
    t: int
    q0: List[float]
    entries: List[QKEntry]
    decay_slope: Optional[float] = None


def qk_report(t: int, certs: List[width.QKCert], cert: SingularityCert) -> QKReport:
    entries = [QKEntry(K=c.K, lo=c.qK.lo, hi=c.qK.hi, gap=c.qK.mid() - cert.q0.mid()) for c in certs]
    slope = None
    if len(certs) >= 3:
        try:
            slope = width.qk_decay_slope(certs, cert.q0)
        except CertificationError as e:
            logger.warning("t=%d: no decay slope: %s", t, e)
    return QKReport(t=t, q0=[cert.q0.lo, cert.q0.hi], entries=entries, decay_slope=slope)


async def qk(request: RunConfig) -> CommandResponse:
    """Certified q_K for each cap K."""
    try:
        t = request.single("t")
        if not request.K:
            raise ValueError("qk needs at least one width cap -K")
        cert = await asyncio.to_thread(asymptotics.solve_q0, t)
        certs = await run_jobs(lambda K: width.solve_qK(t, K), request.K)
        report = qk_report(t, certs, cert)
        if request.fmt == "json":
            text = emit(report.model_dump_json(indent=2) + "\n", request.output)
        else:
            frame = pd.DataFrame(
                [
                    {"K": e.K, "qK_lo": f"{e.lo:.17g}", "qK_hi": f"{e.hi:.17g}", "gap": f"{e.gap:.6e}"}
                    for e in report.entries
                ],
                columns=["K", "qK_lo", "qK_hi", "gap"],
            )
            text = render(frame, request)
        return CommandResponse(command="qk", output=text)
    except (CanonTreeError, ValueError) as e:
        return CommandResponse(command="qk", status="error", error=str(e))


# ----------------------------------------------------------------------
# verification suites
# ----------------------------------------------------------------------
class CheckResult(BaseModel):
    suite: str
    t: int
    check: str
    ok: bool
    detail: str = ""


class Verdict(BaseModel):
    suite: str
    t: List[int]
    verified: bool
    checks: List[CheckResult]


SERIES_ORDER = 120
ENUMERATION_LIMIT = 12
WIDTH_CAP_LIMIT = 40
QK_SLOPE_FROM = 20
WIDTH_MEAN_SIZES = (250, 500, 1000, 2000, 4000)
SLOPE_TOLERANCE = 0.1
P_CHECK_TERMS = 20


def lll_checks(t: int, J: Optional[int] = None, max_depth: Optional[int] = None) -> List[CheckResult]:
    """|q0(e^{i phi})| uniquely minimal at phi = 0, for both parameters."""
    cert = asymptotics.solve_q0(t, J=J)
    results = []
    for mode in locallimit.MODES:
        report = locallimit.verify_unique_min(t, mode, cert, J, max_depth)
        ok = report.verified and report.covers_half_circle()
        detail = (
            f"convex on [0, {report.central_radius:.6g}], {len(report.outer_cells)} outer cells"
            if ok
            else f"failed cell {report.failed_cell}"
        )
        results.append(CheckResult(suite="lll", t=t, check=f"unique minimum ({mode})", ok=ok, detail=detail))
    return results


def width_checks(t: int) -> List[CheckResult]:
    cert = asymptotics.solve_q0(t)
    results = []
    certs = [width.solve_qK(t, K) for K in range(t, WIDTH_CAP_LIMIT + 1)]
    above = all(c.qK.lo > cert.q0.hi for c in certs)
    span = f"K = {t}..{WIDTH_CAP_LIMIT}"
    results.append(CheckResult(suite="width", t=t, check="q_K > q0", ok=above, detail=span))
    stalls = []
    monotone = True
    for a, b in zip(certs, certs[1:]):
        if width.TransferMatrix(t, a.K).same_entries(width.TransferMatrix(t, b.K)):
            stalls.append(b.K)
            monotone = monotone and a.qK.overlaps(b.qK)
        else:
            monotone = monotone and b.qK.hi < a.qK.lo
    detail = span + (f", M_K unchanged at K = {stalls}" if stalls else "")
    results.append(CheckResult(suite="width", t=t, check="q_K strictly decreasing in K", ok=monotone, detail=detail))

    if t == 2:
        tail = [c for c in certs if c.K >= QK_SLOPE_FROM]
        slope = width.qk_decay_slope(tail, cert.q0)
        rate = math.log(cert.q0.mid()) / (t - 1)
        results.append(
            CheckResult(
                suite="width",
                t=t,
                check="ln(q_K - q0) slope",
                ok=abs(slope - rate) <= SLOPE_TOLERANCE * abs(rate),
                detail=f"K = {QK_SLOPE_FROM}..{WIDTH_CAP_LIMIT}: {slope:.6f} against {rate:.6f}",
            )
        )
        mu_w = asymptotics.constant_width(t, cert).mid()
        slope = width.width_mean_slope(t, WIDTH_MEAN_SIZES)
        results.append(
            CheckResult(
                suite="width",
                t=t,
                check="E(w) slope in ln n",
                ok=abs(slope - mu_w) <= SLOPE_TOLERANCE * mu_w,
                detail=f"n = {list(WIDTH_MEAN_SIZES)}: {slope:.6f} against {mu_w:.6f}",
            )
        )

    mismatch = [
        n
        for n in range(ENUMERATION_LIMIT + 1)
        if width.width_distribution(t, n) != dict(Counter(model.parameters(p, t).w for p in model.enumerate_all(t, n)))
    ]
    results.append(
        CheckResult(
            suite="width",
            t=t,
            check="width distribution = enumeration",
            ok=not mismatch,
            detail=f"n <= {ENUMERATION_LIMIT}" + (f", differs at {mismatch}" if mismatch else ""),
        )
    )

    K, order = 6 * t, 20
    matrix = width.TransferMatrix(t, K)
    # a difference needs an entry outside M_K, which carries weight q^(N+1) or q^(r+s), s > (r+K)/t
    expected = min(order + 1, matrix.N + 1, (K + 1) // t + 2)
    agreement = width.determinant_agreement(t, K, order)
    results.append(
        CheckResult(
            suite="width",
            t=t,
            check="det(I - M_K) = 1 - b",
            ok=agreement >= expected,
            detail=f"K={K}: agree below q^{agreement}, need q^{expected}",
        )
    )
    residuals = width.eigenvector_residuals(t, K, cert.q0)
    bad = [r.r for r in residuals if not r.ok]
    results.append(
        CheckResult(
            suite="width",
            t=t,
            check="p is a Perron vector of M_K",
            ok=not bad,
            detail=f"K={K}: rows {bad}" if bad else f"K={K}: {len(residuals)} rows",
        )
    )
    return results


def series_checks(t: int, order: int = SERIES_ORDER) -> List[CheckResult]:
    results = []
    H = series.series_H(t, order)
    mismatch = [n for n in range(order + 1) if H[n] != bigdp.count(t, n)]
    results.append(
        CheckResult(
            suite="series",
            t=t,
            check="[q^n] H = count",
            ok=not mismatch,
            detail=f"n <= {order}" + (f", differs at {mismatch[:5]}" if mismatch else ""),
        )
    )
    mismatch = [
        n
        for n in range(ENUMERATION_LIMIT + 1)
        if sum(1 for _ in model.enumerate_all(t, n)) != bigdp.count(t, n)
    ]
    results.append(
        CheckResult(
            suite="series",
            t=t,
            check="count = enumeration",
            ok=not mismatch,
            detail=f"n <= {ENUMERATION_LIMIT}" + (f", differs at {mismatch}" if mismatch else ""),
        )
    )
    cert = asymptotics.solve_q0(t)
    direct = series.p_table(t, cert.q0, P_CHECK_TERMS)
    recursive = series.p_recursive(t, cert.q0, P_CHECK_TERMS)
    bad = [m for m, (a, b) in enumerate(zip(direct, recursive), start=1) if not a.overlaps(b)]
    results.append(
        CheckResult(suite="series", t=t, check="p_m by coefficients = p_m by recursion", ok=not bad, detail=f"m {bad}" if bad else "")
    )
    return results


def _guarded(suite: str, t: int, fn) -> List[CheckResult]:
    try:
        return fn()
    except (CanonTreeError, ArithmeticError) as e:
        logger.warning("t=%d %s suite aborted: %s", t, suite, e)
        return [CheckResult(suite=suite, t=t, check="suite", ok=False, detail=str(e))]


def run_suite(suite: str, t: int, J: Optional[int] = None, max_depth: Optional[int] = None) -> List[CheckResult]:
    runners = {
        "lll": lambda: lll_checks(t, J, max_depth),
        "width": lambda: width_checks(t),
        "series": lambda: series_checks(t),
    }
    names = list(runners) if suite == "all" else [suite]
    results: List[CheckResult] = []
    for name in names:
        logger.info("t=%d: running %s suite", t, name)
        results.extend(_guarded(name, t, runners[name]))
    return results


async def verify(request: RunConfig) -> CommandResponse:
    """Run a verification suite for every t and print a JSON verdict."""
    per_t = await run_jobs(lambda t: run_suite(request.suite, t, request.J, request.max_depth), request.t)
    checks = [c for batch in per_t for c in batch]
    verdict = Verdict(suite=request.suite, t=request.t, verified=all(c.ok for c in checks), checks=checks)
    text = emit(verdict.model_dump_json(indent=2) + "\n", request.output)
    if not verdict.verified:
        failed = "; ".join(f"t={c.t} {c.check}" for c in checks if not c.ok)
        return CommandResponse(command="verify", output=text, status="failed", error=f"verification failed: {failed}")
    return CommandResponse(command="verify", output=text)


def register(subparsers) -> None:
    parser = subparsers.add_parser("constants", help="certified asymptotic constants")
    parser.add_argument("-t", type=parse_int_list, required=True, help="arity: t, a..b or a,b,c")
    parser.add_argument("--J", type=int, help="truncation order of the b-sums")
    parser.add_argument("--J-sigma", dest="J_sigma", type=int, help="truncation order of the alternating sums")
    parser.add_argument("--precision", type=float, help="target width of the q0 enclosure")
    parser.add_argument("--check-tables", action="store_true", help="compare with the published tables")
    parser.add_argument("--check-expansions", action="store_true", help="compare with the expansions in t (t >= 10)")
    parser.add_argument("--json", dest="fmt", action="store_const", const="json", help="same as --format json")
    add_common_arguments(parser, fmt="table")
    parser.set_defaults(handler=constants, fmt="table")

    parser = subparsers.add_parser("compare", help="exact distribution against its limit law")
    parser.add_argument("-t", type=parse_int_list, required=True, help="arity")
    parser.add_argument("-n", type=parse_int_list, required=True, help="number of internal vertices")
    parser.add_argument("--stat", choices=bigdp.STATS, default="height")
    parser.add_argument("--J", type=int)
    parser.add_argument("--J-sigma", dest="J_sigma", type=int)
    add_common_arguments(parser)
    parser.set_defaults(handler=compare)

    parser = subparsers.add_parser("qk", help="certified singularities q_K of the width-capped series")
    parser.add_argument("-t", type=parse_int_list, required=True, help="arity")
    parser.add_argument("-K", type=int, nargs="+", required=True, help="width caps")
    add_common_arguments(parser)
    parser.set_defaults(handler=qk)

    parser = subparsers.add_parser("verify", help="run an invariant suite and print a JSON verdict")
    parser.add_argument("--suite", choices=("lll", "width", "series", "all"), default="all")
    parser.add_argument("-t", type=parse_int_list, required=True, help="arity: t, a..b or a,b,c")
    parser.add_argument("--J", type=int)
    parser.add_argument("--max-depth", dest="max_depth", type=int, help="bisection depth of the phase scan")
    parser.add_argument("--output", help="write the verdict to this file instead of stdout")
    parser.set_defaults(handler=verify)
