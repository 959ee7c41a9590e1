"""Exact rationals, instances, packings and the superiority order."""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import InvalidInstanceError, InvalidPackingError, ParseError

_RATIONAL_RE = re.compile(r"\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*")

#: Default item-count limits for exhaustive searches.
PARTITION_LIMIT = 10
STRONG_NE_LIMIT = 10
OPT_LIMIT = 24


def exact_limit(default: int) -> int:
    """Exhaustive-search limit, overridable through ``SBP_EXACT_LIMIT``."""
    raw = os.environ.get("SBP_EXACT_LIMIT")
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ParseError(f"SBP_EXACT_LIMIT must be an integer, got {raw!r}") from None
    if value < 1:
        raise ParseError(f"SBP_EXACT_LIMIT must be positive, got {value}")
    return value


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a canonical :class:`Fraction`.

    >>> parse_rational("4/6")
    Fraction(2, 3)
    """
    if not isinstance(text, str):
        raise ParseError(f"expected a rational string, got {type(text).__name__}")
    m = _RATIONAL_RE.fullmatch(text)
    if m is None:
        raise ParseError(f"malformed rational {text!r}", text=text)
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ParseError(f"zero denominator in {text!r}", text=text)
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class SuperiorityOrder:
    """Total order on items: larger size first, lower input index on ties.

    ``order`` lists item indices from most to least superior; ``rank[i]`` is
    the position of item ``i`` in ``order``.
    """

    order: tuple[int, ...]
    rank: tuple[int, ...]

    def superior(self, i: int, j: int) -> bool:
        return self.rank[i] < self.rank[j]

    def sort(self, items: Iterable[int]) -> list[int]:
        return sorted(items, key=self.rank.__getitem__)


@dataclass(frozen=True)
class Instance:
    sizes: tuple[Fraction, ...]
    name: str | None = None

    def __post_init__(self) -> None:
        sizes = tuple(Fraction(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes:
            raise InvalidInstanceError("instance must contain at least one item")
        for i, s in enumerate(sizes):
            if not 0 < s <= 1:
                raise InvalidInstanceError(
                    f"item {i} has size {format_rational(s)} outside (0, 1]",
                    reason="out_of_range", item=i, size=format_rational(s))

    @classmethod
    def from_strings(cls, sizes: Sequence[str], name: str | None = None) -> "Instance":
        return cls(tuple(parse_rational(s) for s in sizes), name)

    def __len__(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return len(self.sizes)

    @cached_property
    def order(self) -> SuperiorityOrder:
        return superiority_order(self)

    @cached_property
    def scale(self) -> int:
        """Common denominator of all sizes; loads become integers in these units."""
        return math.lcm(*(s.denominator for s in self.sizes))

    @cached_property
    def units(self) -> tuple[int, ...]:
        return tuple(s.numerator * (self.scale // s.denominator) for s in self.sizes)

    def load(self, items: Iterable[int]) -> Fraction:
        return Fraction(sum(self.units[i] for i in items), self.scale)

    def total_size(self) -> Fraction:
        return Fraction(sum(self.units), self.scale)


def superiority_order(instance: Instance) -> SuperiorityOrder:
    order = tuple(sorted(range(len(instance.sizes)), key=lambda i: (-instance.sizes[i], i)))
    rank = [0] * len(order)
    for r, i in enumerate(order):
        rank[i] = r
    return SuperiorityOrder(order, tuple(rank))


@dataclass(frozen=True)
class Packing:
    """A partition of item indices into bins; bin ids are positions in ``bins``.

    Construction does not consult an instance, so call :func:`validate_packing`
    before trusting loads or coverage.
    """

    bins: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bins", tuple(tuple(sorted(b)) for b in self.bins))

    @classmethod
    def of(cls, bins: Iterable[Iterable[int]]) -> "Packing":
        return cls(tuple(tuple(b) for b in bins))

    def __len__(self) -> int:
        return len(self.bins)

    @property
    def bins_used(self) -> int:
        return len(self.bins)

    def key(self) -> tuple[tuple[int, ...], ...]:
        """Hashable form independent of bin order (sorted index sets, sorted)."""
        return tuple(sorted(self.bins))

    def canonical(self, instance: Instance) -> "Packing":
        """Bins ordered by the rank of their bottom item."""
        rank = instance.order.rank
        return Packing(tuple(sorted(self.bins, key=lambda b: min(rank[i] for i in b))))

    def bin_of(self) -> dict[int, int]:
        return {i: b for b, items in enumerate(self.bins) for i in items}


def validate_packing(instance: Instance, packing: Packing) -> None:
    """Raise :class:`InvalidPackingError` unless ``packing`` is valid for ``instance``."""
    n = len(instance)
    seen: dict[int, int] = {}
    for b, items in enumerate(packing.bins):
        if not items:
            raise InvalidPackingError("empty_bin", f"bin {b} is empty", bin=b)
        for i in items:
            if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < n:
                raise InvalidPackingError("unknown_index", f"bin {b} holds unknown item {i!r}",
                                          bin=b, item=i if isinstance(i, int) else None)
            if i in seen:
                raise InvalidPackingError(
                    "overlap", f"item {i} appears in bins {seen[i]} and {b}", bin=b, item=i)
            seen[i] = b
        if sum(instance.units[i] for i in items) > instance.scale:
            raise InvalidPackingError(
                "overflow", f"bin {b} has load {format_rational(instance.load(items))} > 1", bin=b)
    for i in range(n):
        if i not in seen:
            raise InvalidPackingError("missing", f"item {i} is not packed", item=i)


def is_valid_packing(instance: Instance, packing: Packing) -> bool:
    try:
        validate_packing(instance, packing)
    except InvalidPackingError:
        return False
    return True


def singletons(instance: Instance) -> Packing:
    return Packing(tuple((i,) for i in range(len(instance))))
