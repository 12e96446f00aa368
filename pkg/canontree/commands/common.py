"""Request/response models and the worker fan-out shared by every command group."""

from __future__ import annotations

import argparse
import asyncio
import logging
from pathlib import Path
from typing import Callable, Iterable, List, Optional, TypeVar

import pandas as pd
from pydantic import BaseModel, field_validator

from canontree.services.bigdp import STATS
from canontree.utils import config
from canontree.utils.output import write_frame

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "table")
SUITES = ("lll", "width", "series", "all")

T = TypeVar("T")
R = TypeVar("R")


def parse_int_list(text: str) -> List[int]:
    """'7', '2..10' or '2,3,5' as a list of integers."""
    try:
        if ".." in text:
            first, last = text.split("..", 1)
            lo, hi = int(first), int(last)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, a range a..b or a list a,b,c; got {text!r}")


class RunConfig(BaseModel):
    """Everything a command needs, validated before dispatch."""

    command: str
    t: List[int] = [2]
    n: List[int] = []
    stat: str = "height"
    K: List[int] = []
    J: Optional[int] = None
    J_sigma: Optional[int] = None
    precision: Optional[float] = None
    fmt: str = "csv"
    output: Optional[str] = None
    seed: int = 0
    size: int = 1
    order: int = 20
    which: str = "H"
    suite: str = "all"
    check_tables: bool = False
    check_expansions: bool = False
    max_depth: Optional[int] = None

    @field_validator("t")
    @classmethod
    def _arities(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one arity is required")
        if any(t < 2 for t in value):
            raise ValueError(f"arity must be at least 2, got {value}")
        return value

    @field_validator("n")
    @classmethod
    def _sizes(cls, value: List[int]) -> List[int]:
        if any(n < 0 for n in value):
            raise ValueError(f"sizes must be non-negative, got {value}")
        return value

    @field_validator("K")
    @classmethod
    def _caps(cls, value: List[int]) -> List[int]:
        if any(k < 1 for k in value):
            raise ValueError(f"width caps must be positive, got {value}")
        return value

    @field_validator("J", "J_sigma", "max_depth")
    @classmethod
    def _positive(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @field_validator("precision")
    @classmethod
    def _precision(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0 < value < 0.1:
            raise ValueError(f"precision must lie in (0, 0.1), got {value}")
        return value

    @field_validator("size", "order")
    @classmethod
    def _count(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @field_validator("stat")
    @classmethod
    def _stat(cls, value: str) -> str:
        if value not in STATS:
            raise ValueError(f"unknown statistic {value!r}; expected one of {', '.join(STATS)}")
        return value

    @field_validator("fmt")
    @classmethod
    def _fmt(cls, value: str) -> str:
        if value not in FORMATS:
            raise ValueError(f"unknown format {value!r}")
        return value

    @field_validator("suite")
    @classmethod
    def _suite(cls, value: str) -> str:
        if value not in SUITES:
            raise ValueError(f"unknown suite {value!r}; expected one of {', '.join(SUITES)}")
        return value

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = {k: v for k, v in vars(args).items() if k in cls.model_fields and v is not None}
        return cls(**values)

    def single(self, field: str) -> int:
        values = getattr(self, field)
        if len(values) != 1:
            raise ValueError(f"{self.command} takes a single value for {field}, got {values}")
        return values[0]


class CommandResponse(BaseModel):
    command: str
    output: str = ""
    status: str = "success"
    error: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return 0 if self.status == "success" else 1


def emit(text: str, output: Optional[str]) -> str:
    """Save text to the output path if given; return what goes to stdout."""
    if output:
        Path(output).write_text(text)
        logger.info("wrote %s", output)
        return ""
    return text


def render(frame: pd.DataFrame, request: RunConfig) -> str:
    """Format a frame; save it when an output path is set and return what goes to stdout."""
    text = write_frame(frame, request.fmt, request.output)
    if request.output:
        logger.info("wrote %s", request.output)
        return ""
    return text


async def run_jobs(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Run fn over items in worker threads, at most `workers` at a time, results in input order."""
    semaphore = asyncio.Semaphore(workers or config.WORKERS)

    async def job(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    return list(await asyncio.gather(*(job(item) for item in items)))


def add_common_arguments(parser: argparse.ArgumentParser, fmt: str = "csv") -> None:
    parser.add_argument("--format", dest="fmt", choices=FORMATS, default=fmt, help="output format")
    parser.add_argument("--output", help="write the result to this file instead of stdout")
