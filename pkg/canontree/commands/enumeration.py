"""Exact enumeration commands: count, dist, moments, sample, series."""

from __future__ import annotations

import asyncio
import itertools
import json
import logging
from typing import List, Optional

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
from canontree.services import bigdp, model, series
from canontree.utils import config
from canontree.utils.errors import CanonTreeError
from canontree.utils.output import decimal_string

logger = logging.getLogger(__name__)


class SampleRecord(BaseModel):
    profile: List[int]
    parameters: model.ParameterVector


async def count_trees(request: RunConfig) -> CommandResponse:
    """Number of trees for every requested (t, n); a bare number for a single pair."""
    try:
        pairs = list(itertools.product(request.t, request.n or [0]))
        counts = await run_jobs(lambda pair: bigdp.count(*pair), pairs)
        if len(pairs) == 1 and request.fmt == "csv":
            return CommandResponse(command="count", output=emit(f"{counts[0]}\n", request.output))
        frame = pd.DataFrame(
            [{"t": t, "n": n, "count": str(c)} for (t, n), c in zip(pairs, counts)],
            columns=["t", "n", "count"],
        )
        return CommandResponse(command="count", output=render(frame, request))
    except (CanonTreeError, ValueError) as e:
        return CommandResponse(command="count", status="error", error=str(e))


async def distribution(request: RunConfig) -> CommandResponse:
    try:
        t, n = request.single("t"), request.single("n")
        table = await asyncio.to_thread(bigdp.dist, t, n, request.stat)
        return CommandResponse(command="dist", output=render(table.to_frame(), request))
    except (CanonTreeError, ValueError) as e:
        return CommandResponse(command="dist", status="error", error=str(e))


async def exact_moments(request: RunConfig) -> CommandResponse:
    """Exact mean and variance for each requested size."""
    try:
        t = request.single("t")
        sizes = request.n or [0]
        results = await run_jobs(lambda n: bigdp.moments(t, n, request.stat), sizes)
        digits = config.PROB_DIGITS
        frame = pd.DataFrame(
            [
                {
                    "t": t,
                    "n": n,
                    "stat": request.stat,
                    "mean": str(m.mean),
                    "variance": str(m.variance),
                    "mean_decimal": decimal_string(m.mean, digits),
                    "variance_decimal": decimal_string(m.variance, digits),
                }
                for n, m in zip(sizes, results)
            ],
            columns=["t", "n", "stat", "mean", "variance", "mean_decimal", "variance_decimal"],
        )
        return CommandResponse(command="moments", output=render(frame, request))
    except (CanonTreeError, ValueError) as e:
        return CommandResponse(command="moments", status="error", error=str(e))


async def sample_trees(request: RunConfig) -> CommandResponse:
    """Uniform random profiles, one JSON list per line; json format adds every parameter."""
    try:
        t, n = request.single("t"), request.single("n")
        profiles = await asyncio.to_thread(bigdp.sample_many, t, n, request.seed, request.size)
        if request.fmt == "json":
            records = [SampleRecord(profile=list(p), parameters=model.parameters(p, t)).model_dump() for p in profiles]
            text = json.dumps(records, indent=2) + "\n"
        else:
            text = "".join(json.dumps(list(p)) + "\n" for p in profiles)
        return CommandResponse(command="sample", output=emit(text, request.output))
    except (CanonTreeError, ValueError) as e:
        return CommandResponse(command="sample", status="error", error=str(e))


async def series_coefficients(request: RunConfig) -> CommandResponse:
    try:
        t = request.single("t")
        frame = await asyncio.to_thread(series.series_dump, t, request.order, request.which)
        return CommandResponse(command="series", output=render(frame, request))
    except (CanonTreeError, ValueError) as e:
        return CommandResponse(command="series", status="error", error=str(e))


def _arity_and_size(parser, size_help: Optional[str] = None) -> None:
    parser.add_argument("-t", type=parse_int_list, required=True, help="arity")
    parser.add_argument("-n", type=parse_int_list, required=True, help=size_help or "number of internal vertices")


def register(subparsers) -> None:
    parser = subparsers.add_parser("count", help="number of trees with n internal vertices")
    parser.add_argument("-t", type=parse_int_list, required=True, help="arity: t, a..b or a,b,c")
    parser.add_argument("-n", type=parse_int_list, required=True, help="size: n, a..b or a,b,c")
    add_common_arguments(parser)
    parser.set_defaults(handler=count_trees)

    parser = subparsers.add_parser("dist", help="exact distribution of a statistic")
    _arity_and_size(parser)
    parser.add_argument("--stat", choices=bigdp.STATS, default="height")
    add_common_arguments(parser)
    parser.set_defaults(handler=distribution)

    parser = subparsers.add_parser("moments", help="exact mean and variance of a statistic")
    _arity_and_size(parser, "size: n, a..b or a,b,c")
    parser.add_argument("--stat", choices=bigdp.STATS, default="height")
    add_common_arguments(parser)
    parser.set_defaults(handler=exact_moments)

    parser = subparsers.add_parser("sample", help="uniformly random trees")
    _arity_and_size(parser)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=1, help="number of trees to draw")
    add_common_arguments(parser)
    parser.set_defaults(handler=sample_trees)

    parser = subparsers.add_parser("series", help="coefficients of H(q), a(q) or b(q)")
    parser.add_argument("-t", type=parse_int_list, required=True, help="arity")
    parser.add_argument("-N", dest="order", type=int, default=20, help="highest exponent")
    parser.add_argument("--which", choices=("H", "a", "b"), default="H")
    add_common_arguments(parser)
    parser.set_defaults(handler=series_coefficients)
