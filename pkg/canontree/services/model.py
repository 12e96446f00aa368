"""
Canonical t-ary trees in their three equivalent guises.

A tree is stored as its level profile: the number of internal vertices on
each level, (n_0, ..., n_{h-1}) with n_0 = 1 and n_{i+1} <= t*n_i. The empty
profile is the single leaf. Code word sets and Kraft partitions are derived on
demand.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from canontree.utils.errors import ProfileError

logger = logging.getLogger(__name__)

LevelProfile = Tuple[int, ...]
CodeWordSet = Tuple[str, ...]
Partition = Tuple[int, ...]

# code word symbols 1..t
ALPHABET = "123456789abcdefghijklmnopqrstuvwxyz"


class ParameterVector(BaseModel):
    """Every statistic of one tree."""

    model_config = ConfigDict(frozen=True)

    n: int
    tau: int
    h: int
    d: int
    w: int
    m: int
    ell: int
    ell_int: int
    ell_ext: int


def check_arity(t: int) -> int:
    if isinstance(t, bool) or not isinstance(t, int) or t < 2:
        raise ProfileError(f"arity must be an integer t >= 2, got {t!r}")
    return t


def validate_profile(p: Sequence[int], t: int) -> bool:
    """True iff p is the level profile of a canonical t-ary tree."""
    if isinstance(t, bool) or not isinstance(t, int) or t < 2:
        return False
    levels = tuple(p)
    if not levels:
        return True
    if any(isinstance(x, bool) or not isinstance(x, int) or x < 1 for x in levels):
        return False
    if levels[0] != 1:
        return False
    return all(nxt <= t * cur for cur, nxt in zip(levels, levels[1:]))


def require_profile(p: Sequence[int], t: int) -> LevelProfile:
    check_arity(t)
    if not validate_profile(p, t):
        raise ProfileError(f"not a canonical {t}-ary level profile: {list(p)}")
    return tuple(p)


def vertices_per_level(p: LevelProfile, t: int) -> List[int]:
    """v_0 = 1 and v_k = t*n_{k-1} for 1 <= k <= h."""
    return [1] + [t * x for x in p]


def leaves_per_level(p: LevelProfile, t: int) -> List[int]:
    vertices = vertices_per_level(p, t)
    internal = list(p) + [0]
    return [v - i for v, i in zip(vertices, internal)]


def parameters(p: Sequence[int], t: int) -> ParameterVector:
    """Evaluate all parameters of the tree with profile p."""
    levels = require_profile(p, t)
    n = sum(levels)
    h = len(levels)
    leaves = leaves_per_level(levels, t)
    vertices = vertices_per_level(levels, t)
    ell = sum(k * v for k, v in enumerate(vertices))
    # ell is a multiple of t, so both parts are integers
    ell_ext = (t - 1) * ell // t + n
    ell_int = ell // t - n
    return ParameterVector(
        n=n,
        tau=1 + n * (t - 1),
        h=h,
        d=sum(1 for x in leaves if x > 0),
        w=max(leaves),
        m=t * levels[-1] if levels else 1,
        ell=ell,
        ell_int=ell_int,
        ell_ext=ell_ext,
    )


def to_partition(p: Sequence[int], t: int) -> Partition:
    """Multiset of leaf depths, sorted non-decreasingly."""
    levels = require_profile(p, t)
    exponents: List[int] = []
    for depth, count in enumerate(leaves_per_level(levels, t)):
        exponents.extend([depth] * count)
    return tuple(exponents)


def to_code(p: Sequence[int], t: int) -> CodeWordSet:
    """
    Canonical code words of the tree.

    Leaves take the leftmost positions of every level and internal vertices
    the rightmost ones, so lexicographic order refines length order.
    """
    levels = require_profile(p, t)
    if t > len(ALPHABET):
        raise ProfileError(f"code words are only spelled for t <= {len(ALPHABET)}")
    symbols = ALPHABET[:t]
    words: List[str] = []
    current = [""]
    for internal in list(levels) + [0]:
        split = len(current) - internal
        words.extend(current[:split])
        current = [prefix + s for prefix in current[split:] for s in symbols]
    return tuple(words)


def kraft_sum(partition: Sequence[int], t: int) -> Fraction:
    return sum((Fraction(1, t ** x) for x in partition), Fraction(0))


def from_partition(partition: Sequence[int], t: int) -> LevelProfile:
    """Inverse of to_partition; the exponents must satisfy Kraft equality."""
    check_arity(t)
    exponents = list(partition)
    if not exponents or any(isinstance(x, bool) or not isinstance(x, int) or x < 0 for x in exponents):
        raise ProfileError(f"invalid partition exponents: {exponents}")
    if exponents != sorted(exponents):
        raise ProfileError("partition exponents must be non-decreasing")
    if kraft_sum(exponents, t) != 1:
        raise ProfileError(f"Kraft sum of {exponents} is not 1")
    height = exponents[-1]
    leaves = [0] * (height + 1)
    for x in exponents:
        leaves[x] += 1
    levels: List[int] = []
    vertices = 1
    for depth in range(height):
        internal = vertices - leaves[depth]
        if internal < 1:
            raise ProfileError(f"partition has no internal vertex on level {depth}")
        levels.append(internal)
        vertices = t * internal
    if vertices != leaves[height]:
        raise ProfileError("partition does not describe a full t-ary tree")
    return require_profile(levels, t)


def from_code(words: Sequence[str], t: int) -> LevelProfile:
    """Inverse of to_code; checks prefix-freeness and the canonical ordering."""
    check_arity(t)
    symbols = set(ALPHABET[:t])
    ordered = sorted(words)
    if len(set(ordered)) != len(ordered):
        raise ProfileError("duplicate code words")
    for word in ordered:
        if any(ch not in symbols for ch in word):
            raise ProfileError(f"code word {word!r} uses symbols outside 1..{t}")
    for first, second in zip(ordered, ordered[1:]):
        if second.startswith(first):
            raise ProfileError(f"{first!r} is a prefix of {second!r}")
        if len(first) > len(second):
            raise ProfileError("code is not canonical: lexicographic order breaks length order")
    profile = from_partition(sorted(len(w) for w in ordered), t)
    if to_code(profile, t) != tuple(ordered):
        raise ProfileError("code words are not the canonical code of their length profile")
    return profile


def enumerate_all(t: int, n: int) -> Iterator[LevelProfile]:
    """Every profile with n internal vertices, each once, in lexicographic order."""
    check_arity(t)
    if n < 0:
        return
    if n == 0:
        yield ()
        return

    def extend(prefix: List[int], remaining: int) -> Iterator[LevelProfile]:
        if remaining == 0:
            yield tuple(prefix)
            return
        for nxt in range(1, min(t * prefix[-1], remaining) + 1):
            prefix.append(nxt)
            yield from extend(prefix, remaining - nxt)
            prefix.pop()

    yield from extend([1], n - 1)
