"""Exact decimal formatting and pandas-backed CSV/table rendering."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Optional

import pandas as pd

from canontree.utils.interval import Interval


def decimal_string(value: Fraction, digits: int) -> str:
    """Round an exact rational half-to-even to a fixed number of decimals."""
    value = Fraction(value)
    sign = "-" if value < 0 else ""
    value = abs(value)
    scaled, remainder = divmod(value.numerator * 10 ** digits, value.denominator)
    twice = 2 * remainder
    if twice > value.denominator or (twice == value.denominator and scaled % 2 == 1):
        scaled += 1
    if digits == 0:
        return f"{sign}{scaled}"
    text = str(scaled).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def interval_dict(value: Interval) -> dict:
    return {"lo": value.lo, "hi": value.hi, "display": repr(value)}


def interval_cell(value: Interval) -> str:
    """Midpoint plus width, the layout of the printed constant tables."""
    return f"{value.mid():.16f} (±{value.width() / 2:.1e})"


def write_frame(frame: pd.DataFrame, fmt: str, output: Optional[str] = None) -> str:
    """Render a DataFrame as csv, json or an aligned table; optionally save it."""
    if fmt == "csv":
        text = frame.to_csv(index=False, lineterminator="\n")
    elif fmt == "json":
        text = frame.to_json(orient="records", indent=2) + "\n"
    else:
        text = frame.to_string(index=False) + "\n"
    if output:
        Path(output).write_text(text)
    return text
