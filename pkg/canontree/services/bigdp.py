"""
Exact counting, distributions, moments and uniform sampling of canonical trees.

Every tree arises from the root by repeated expansion: a tree whose last level
carries m leaves is extended by turning j of them (1 <= j <= m) into internal
vertices, which puts j*t leaves on a new level. A DP state is (n, r): n
internal vertices used so far and r internal vertices on the level just
expanded, so the last level carries m = t*r leaves. The root state has m = 1.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, List, NamedTuple, Optional, Tuple

import pandas as pd

from canontree.services.model import LevelProfile, check_arity
from canontree.utils import config
from canontree.utils.errors import ResourceLimitError
from canontree.utils.output import decimal_string

logger = logging.getLogger(__name__)

STATS = ("height", "distinct_depths", "last_level_leaves", "width", "total_path_length")


class DPState(NamedTuple):
    n: int
    m: int


class ExactMoments(NamedTuple):
    mean: Fraction
    second_moment: Fraction
    variance: Fraction
    third_moment: Fraction
    fourth_moment: Fraction

    @classmethod
    def from_power_sums(cls, sums) -> "ExactMoments":
        """From (count, sum x, sum x^2, sum x^3, sum x^4)."""
        c = sums[0]
        mean, second, third, fourth = (Fraction(s, c) for s in sums[1:5])
        return cls(mean, second, second - mean * mean, third, fourth)

    def central_third(self) -> Fraction:
        m = self.mean
        return self.third_moment - 3 * m * self.second_moment + 2 * m ** 3

    def central_fourth(self) -> Fraction:
        m = self.mean
        return self.fourth_moment - 4 * m * self.third_moment + 6 * m * m * self.second_moment - 3 * m ** 4

    def skewness(self) -> float:
        if self.variance == 0:
            return 0.0
        return float(self.central_third()) / float(self.variance) ** 1.5

    def excess_kurtosis(self) -> float:
        if self.variance == 0:
            return 0.0
        return float(self.central_fourth() / (self.variance * self.variance)) - 3.0


@dataclass(frozen=True)
class DistTable:
    """Exact distribution of one statistic over all trees of size n."""

    stat_name: str
    t: int
    n: int
    entries: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def probability(self, value: int) -> Fraction:
        return Fraction(self.entries.get(value, 0), self.total)

    def probabilities(self) -> Dict[int, Fraction]:
        total = self.total
        return {k: Fraction(v, total) for k, v in sorted(self.entries.items())}

    def moments(self) -> ExactMoments:
        sums = [self.total] + [sum(k ** p * v for k, v in self.entries.items()) for p in range(1, 5)]
        return ExactMoments.from_power_sums(sums)

    def to_frame(self, digits: Optional[int] = None) -> pd.DataFrame:
        digits = config.PROB_DIGITS if digits is None else digits
        total = self.total
        rows = [
            {
                "value": value,
                "count": str(count),
                "probability": decimal_string(Fraction(count, total), digits),
            }
            for value, count in sorted(self.entries.items())
        ]
        return pd.DataFrame(rows, columns=["value", "count", "probability"])


def _check_cap(what: str, n: int, cap: int) -> None:
    if n < 0:
        raise ValueError(f"{what}: size must be non-negative, got {n}")
    if n > cap:
        raise ResourceLimitError(what, n, cap)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _suffix_sums(row: List[int]) -> List[int]:
    out = [0] * (len(row) + 1)
    acc = 0
    for r in range(len(row) - 1, 0, -1):
        acc += row[r]
        out[r] = acc
    return out


@lru_cache(maxsize=8)
def _count_rows(t: int, size: int) -> Tuple[Tuple[Tuple[int, ...], ...], Tuple[Tuple[int, ...], ...]]:
    """
    rows[n][r]: number of expansion paths ending in state (n, r).
    suffixes[n][k] = sum of rows[n][r] over r >= k.
    """
    rows: List[Tuple[int, ...]] = [(0,)]
    suffixes: List[Tuple[int, ...]] = [(0,)]
    for n in range(1, size + 1):
        row = [0] * (n + 1)
        if n == 1:
            row[1] = 1
        for j in range(1, n):
            suffix = suffixes[n - j]
            k = _ceil_div(j, t)
            if k < len(suffix):
                row[j] = suffix[k]
        rows.append(tuple(row))
        suffixes.append(tuple(_suffix_sums(row)))
    return tuple(rows), tuple(suffixes)


def count(t: int, n: int) -> int:
    """Number of canonical t-ary trees with n internal vertices."""
    check_arity(t)
    _check_cap("count", n, config.COUNT_CAP)
    if n == 0:
        return 1
    _, suffixes = _count_rows(t, n)
    return suffixes[n][1]


def count_by_m(t: int, n: int) -> Dict[int, int]:
    """Trees of size n keyed by the number m of leaves on their last level."""
    check_arity(t)
    _check_cap("count", n, config.COUNT_CAP)
    if n == 0:
        return {1: 1}
    rows, _ = _count_rows(t, n)
    return {t * r: c for r, c in enumerate(rows[n]) if r and c}


def terminal_states(t: int, n: int) -> List[Tuple[DPState, int]]:
    return [(DPState(n, m), c) for m, c in sorted(count_by_m(t, n).items())]


# ----------------------------------------------------------------------
# distributions
# ----------------------------------------------------------------------
def _height_dist(t: int, n: int) -> Dict[int, int]:
    if n == 0:
        return {0: 1}
    entries: Dict[int, int] = {}
    layer: Dict[int, List[int]] = {1: [0, 1]}
    height = 1
    while layer:
        if n in layer:
            entries[height] = sum(layer[n])
        nxt: Dict[int, List[int]] = {}
        for used, row in layer.items():
            suffix = _suffix_sums(row)
            for j in range(1, n - used + 1):
                k = _ceil_div(j, t)
                if k >= len(row):
                    break
                value = suffix[k]
                if value:
                    target = nxt.setdefault(used + j, [0] * (used + j + 1))
                    target[j] += value
        layer = nxt
        height += 1
    return entries


def _depths_dist(t: int, n: int) -> Dict[int, int]:
    if n == 0:
        return {1: 1}
    entries: Dict[int, int] = {}
    layer: Dict[int, List[int]] = {1: [0, 1]}
    depths = 1
    while layer:
        # full expansions keep the number of leaf depths
        for used in range(1, n + 1):
            row = layer.get(used)
            if row is None:
                continue
            for r in range(1, len(row)):
                value = row[r]
                if value and used + t * r <= n:
                    target = layer.setdefault(used + t * r, [0] * (used + t * r + 1))
                    target[t * r] += value
        if n in layer:
            entries[depths] = sum(layer[n])
        nxt: Dict[int, List[int]] = {}
        for used, row in layer.items():
            suffix = _suffix_sums(row)
            for j in range(1, n - used + 1):
                # j < m = t*r, i.e. r >= j // t + 1
                k = j // t + 1
                if k >= len(row):
                    break
                value = suffix[k]
                if value:
                    target = nxt.setdefault(used + j, [0] * (used + j + 1))
                    target[j] += value
        layer = nxt
        depths += 1
    return entries


def _add_shifted(target: List[int], source: List[int], shift: int) -> None:
    needed = len(source) + shift
    if len(target) < needed:
        target.extend([0] * (needed - len(target)))
    for i, value in enumerate(source):
        if value:
            target[i + shift] += value


def _path_length_dist(t: int, n: int) -> Dict[int, int]:
    # total path length = t * sum over expansion steps of (n - used before the step)
    if n == 0:
        return {0: 1}
    rows: Dict[int, Dict[int, List[int]]] = {1: {1: [0] * n + [1]}}
    for used in range(1, n):
        row = rows.pop(used, None)
        if not row:
            continue
        shift = n - used
        acc: List[int] = []
        for r in range(max(row), 0, -1):
            if r in row:
                _add_shifted(acc, row[r], 0)
            # acc now holds the suffix sum over r' >= r
            for j in range(t * (r - 1) + 1, min(t * r, n - used) + 1):
                target = rows.setdefault(used + j, {}).setdefault(j, [])
                _add_shifted(target, acc, shift)
    final: List[int] = []
    for poly in rows.get(n, {}).values():
        _add_shifted(final, poly, 0)
    return {t * a: c for a, c in enumerate(final) if c}


def dist(t: int, n: int, stat: str) -> DistTable:
    """Exact distribution of a statistic over the trees of size n."""
    check_arity(t)
    if stat not in STATS:
        raise ValueError(f"unknown statistic {stat!r}; expected one of {', '.join(STATS)}")
    _check_cap(f"dist({stat})", n, config.DIST_CAPS[stat])
    logger.debug("dist t=%d n=%d stat=%s", t, n, stat)
    if stat == "height":
        entries = _height_dist(t, n)
    elif stat == "distinct_depths":
        entries = _depths_dist(t, n)
    elif stat == "last_level_leaves":
        entries = count_by_m(t, n)
    elif stat == "width":
        from canontree.services.width import width_distribution

        entries = width_distribution(t, n)
    else:
        entries = _path_length_dist(t, n)
    return DistTable(stat_name=stat, t=t, n=n, entries=dict(sorted(entries.items())))


# ----------------------------------------------------------------------
# moments
# ----------------------------------------------------------------------
PowerSums = Tuple[int, ...]

# count and the sums of stat^1 .. stat^4
_ORDER = 4
_ZERO: PowerSums = (0,) * (_ORDER + 1)


def _shift(sums: PowerSums, delta: int) -> PowerSums:
    """Power sums of stat + delta from those of stat."""
    if delta == 0:
        return sums
    return tuple(
        sum(comb(k, i) * delta ** (k - i) * sums[i] for i in range(k + 1)) for k in range(_ORDER + 1)
    )


def _add(a: PowerSums, b: PowerSums) -> PowerSums:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: PowerSums, b: PowerSums) -> PowerSums:
    return tuple(x - y for x, y in zip(a, b))


def _moment_sums(t: int, n: int, stat: str) -> PowerSums:
    """(count, sum of stat, ..., sum of stat^4) with the statistic accumulated along the path."""
    if stat == "height":
        start, root_delta = (1,) + (0,) * _ORDER, 1
    elif stat == "distinct_depths":
        start, root_delta = (1,) * (_ORDER + 1), 0
    else:
        start, root_delta = (1,) + (0,) * _ORDER, n
    if n == 0:
        return start
    rows: Dict[int, List[PowerSums]] = {1: [_ZERO, _shift(start, root_delta)]}
    for used in range(1, n):
        row = rows.pop(used, None)
        if row is None:
            continue
        suffix: List[PowerSums] = [_ZERO] * (len(row) + 1)
        acc = _ZERO
        for r in range(len(row) - 1, 0, -1):
            acc = _add(acc, row[r])
            suffix[r] = acc
        for j in range(1, n - used + 1):
            k = _ceil_div(j, t)
            if k >= len(row):
                break
            base = suffix[k]
            if stat == "height":
                contribution = _shift(base, 1)
            elif stat == "total_path_length":
                contribution = _shift(base, n - used)
            elif j % t == 0:
                full = row[j // t]
                contribution = _add(_shift(_sub(base, full), 1), full)
            else:
                contribution = _shift(base, 1)
            target = rows.setdefault(used + j, [_ZERO] * (used + j + 1))
            target[j] = _add(target[j], contribution)
    total = _ZERO
    for sums in rows.get(n, []):
        total = _add(total, sums)
    return total


def moments(t: int, n: int, stat: str) -> ExactMoments:
    """Exact raw moments up to order four under the uniform distribution."""
    check_arity(t)
    if stat not in STATS:
        raise ValueError(f"unknown statistic {stat!r}; expected one of {', '.join(STATS)}")
    if stat == "width":
        return dist(t, n, "width").moments()
    _check_cap(f"moments({stat})", n, config.MOMENTS_CAP)
    if stat == "last_level_leaves":
        return DistTable(stat, t, n, count_by_m(t, n)).moments()
    sums = _moment_sums(t, n, stat)
    if stat == "total_path_length":
        sums = tuple(s * t ** k for k, s in enumerate(sums))
    return ExactMoments.from_power_sums(sums)


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------
def _uniform_below(rng: random.Random, bound: int) -> int:
    bits = bound.bit_length()
    while True:
        x = rng.getrandbits(bits)
        if x < bound:
            return x


def _walk_back(t: int, n: int, x: int) -> LevelProfile:
    rows, _ = _count_rows(t, n)
    row = rows[n]
    r = 1
    while x >= row[r]:
        x -= row[r]
        r += 1
    levels = [r]
    current = n
    while current - r > 0:
        previous = current - r
        prev_row = rows[previous]
        candidate = _ceil_div(r, t)
        while x >= prev_row[candidate]:
            x -= prev_row[candidate]
            candidate += 1
        current, r = previous, candidate
        levels.append(r)
    return tuple(reversed(levels))


def sample_uniform(t: int, n: int, seed: int) -> LevelProfile:
    """A uniformly random profile of size n, reproducible for a given seed."""
    return sample_many(t, n, seed, 1)[0]


def sample_many(t: int, n: int, seed: int, size: int) -> List[LevelProfile]:
    check_arity(t)
    _check_cap("sample", n, config.COUNT_CAP)
    if n == 0:
        return [()] * size
    rng = random.Random(seed)
    total = count(t, n)
    return [_walk_back(t, n, _uniform_below(rng, total)) for _ in range(size)]
