"""Cost-sharing rules: local-size-based densities and two baseline rules.

Two independent routes compute cost shares.  :func:`bin_cost_vector` works
directly on :class:`~fractions.Fraction` values through the closed-form
cumulative density.  :class:`Pricer` rescales every size and the threshold
to integers over a common denominator and tabulates the cumulative density
once, which is what the equilibrium code uses in its inner loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, SBPError
from .model import Instance, Packing, format_rational, parse_rational, validate_packing

LOCAL = "local_size"
PROPORTIONAL = "proportional"
EGALITARIAN = "egalitarian"

TRIANGULAR = "triangular"
QUADRATIC = "quadratic"
DENSITIES = (TRIANGULAR, QUADRATIC)


@dataclass(frozen=True)
class CostRule:
    kind: str
    lam: Fraction | None = None
    density: str | None = None

    def __post_init__(self) -> None:
        if self.kind == LOCAL:
            if self.lam is None:
                raise ParseError("local_size rule needs a threshold")
            lam = Fraction(self.lam)
            object.__setattr__(self, "lam", lam)
            if not 0 < lam <= 1:
                raise ParseError(f"threshold {format_rational(lam)} outside (0, 1]")
            density = self.density or TRIANGULAR
            if density not in DENSITIES:
                raise ParseError(f"unknown density {density!r}")
            object.__setattr__(self, "density", density)
        elif self.kind in (PROPORTIONAL, EGALITARIAN):
            if self.lam is not None or self.density is not None:
                raise ParseError(f"{self.kind} rule takes no parameters")
        else:
            raise ParseError(f"unknown rule kind {self.kind!r}")

    @classmethod
    def local(cls, lam: Fraction | str, density: str = TRIANGULAR) -> "CostRule":
        if isinstance(lam, str):
            lam = parse_rational(lam)
        return cls(LOCAL, Fraction(lam), density)

    @property
    def is_local(self) -> bool:
        return self.kind == LOCAL

    def cumulative(self, x: Fraction) -> Fraction:
        return cumulative_density(self, x)

    def __str__(self) -> str:
        return format_rule(self)


PROPORTIONAL_RULE = CostRule(PROPORTIONAL)
EGALITARIAN_RULE = CostRule(EGALITARIAN)


def parse_rule(text: str) -> CostRule:
    """Parse ``local:3/4:triangular``, ``local:2/3``, ``proportional`` or ``egalitarian``."""
    parts = text.strip().split(":")
    head = parts[0].lower()
    if head in ("local", LOCAL):
        if len(parts) not in (2, 3):
            raise ParseError(f"malformed rule {text!r}; expected local:<lambda>[:<density>]")
        density = parts[2].lower() if len(parts) == 3 else TRIANGULAR
        return CostRule(LOCAL, parse_rational(parts[1]), density)
    if head in (PROPORTIONAL, EGALITARIAN) and len(parts) == 1:
        return CostRule(head)
    raise ParseError(f"unknown rule {text!r}")


def format_rule(rule: CostRule) -> str:
    if rule.kind == LOCAL:
        return f"local:{format_rational(rule.lam)}:{rule.density}"
    return rule.kind


def cumulative_density(rule: CostRule, x: Fraction) -> Fraction:
    """Integral of the cost density from 0 to ``x``; saturates at 1 from the threshold on."""
    if not rule.is_local:
        raise SBPError(f"{rule.kind} rule has no cost density")
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError(f"x = {format_rational(x)} outside [0, 1]")
    lam = rule.lam
    if x >= lam:
        return Fraction(1)
    if rule.density == TRIANGULAR:
        return 2 * x / lam - x * x / (lam * lam)
    return 1 - (1 - x / lam) ** 3


def bin_cost_vector(rule: CostRule, instance: Instance, items: Iterable[int]) -> dict[int, Fraction]:
    """Exact cost share of every item in one bin."""
    items = instance.order.sort(items)
    if not items:
        raise SBPError("cannot price an empty bin")
    sizes = instance.sizes
    load = sum((sizes[i] for i in items), Fraction(0))
    if load > 1:
        raise SBPError(f"bin load {format_rational(load)} exceeds 1")
    if rule.kind == PROPORTIONAL:
        return {i: sizes[i] / load for i in items}
    if rule.kind == EGALITARIAN:
        share = Fraction(1, len(items))
        return {i: share for i in items}
    F = rule.cumulative
    costs: dict[int, Fraction] = {}
    prefix = Fraction(0)
    for i in items:
        costs[i] = F(prefix + sizes[i]) - F(prefix)
        prefix += sizes[i]
    costs[items[0]] += 1 - F(load)
    return costs


def packing_cost_vector(rule: CostRule, instance: Instance, packing: Packing) -> dict[int, Fraction]:
    validate_packing(instance, packing)
    costs: dict[int, Fraction] = {}
    for items in packing.bins:
        costs.update(bin_cost_vector(rule, instance, items))
    return dict(sorted(costs.items()))


class Pricer:
    """Integer-scaled cost evaluation for one (rule, instance) pair.

    Sizes are expressed in ``unit`` = 1/``capacity``.  For local rules costs are
    integers over the fixed denominator ``denominator``; baseline rules return
    :class:`Fraction` values.  Either way values of one pricer compare exactly.
    """

    def __init__(self, rule: CostRule, instance: Instance) -> None:
        self.rule = rule
        self.instance = instance
        cap = instance.scale
        if rule.is_local:
            cap = math.lcm(cap, rule.lam.denominator)
        factor = cap // instance.scale
        self.capacity = cap
        self.units = tuple(u * factor for u in instance.units)
        self.rank = instance.order.rank
        self.local = rule.is_local
        if self.local:
            lam_units = rule.lam.numerator * (cap // rule.lam.denominator)
            self.lam_units = lam_units
            self.table, self.denominator = _cumulative_table(rule.density, lam_units, cap)
            self.full = self.denominator
        else:
            self.lam_units = None
            self.table = None
            self.denominator = 1
            self.full = Fraction(1)

    def bin_costs(self, items: Sequence[int]) -> list:
        """Costs of ``items``, which must already be sorted by rank."""
        u = self.units
        if self.local:
            G = self.table
            out = []
            prefix = 0
            for i in items:
                nxt = prefix + u[i]
                out.append(G[nxt] - G[prefix])
                prefix = nxt
            out[0] += self.denominator - G[prefix]
            return out
        if self.rule.kind == PROPORTIONAL:
            load = sum(u[i] for i in items)
            return [Fraction(u[i], load) for i in items]
        share = Fraction(1, len(items))
        return [share] * len(items)

    def cost_in(self, item: int, items: Sequence[int]) -> object:
        """Cost of ``item`` in a bin holding ``items`` (sorted by rank, containing ``item``)."""
        return self.bin_costs(items)[items.index(item)]

    def to_fraction(self, value) -> Fraction:
        if self.local:
            return Fraction(value, self.denominator)
        return Fraction(value)

    def costs(self, packing: Packing) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for items in packing.bins:
            items = sorted(items, key=self.rank.__getitem__)
            for i, c in zip(items, self.bin_costs(items)):
                out[i] = self.to_fraction(c)
        return dict(sorted(out.items()))


def _cumulative_table(density: str, lam: int, cap: int) -> tuple[list[int], int]:
    # entries are F(x / cap) * denom for x = 0..cap, with the threshold at lam / cap
    if density == TRIANGULAR:
        denom = lam * lam
        table = [2 * x * lam - x * x if x < lam else denom for x in range(cap + 1)]
    else:
        denom = lam ** 3
        table = [denom - (lam - x) ** 3 if x < lam else denom for x in range(cap + 1)]
    return table, denom


def format_costs(costs: Mapping[int, Fraction]) -> dict[str, str]:
    return {str(i): format_rational(c) for i, c in costs.items()}
