"""Exhaustive packing and equilibrium enumeration on small instances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator

from .costs import CostRule, Pricer, format_rule
from .equilibrium import is_nash
from .errors import EngineInconsistency, LimitExceededError, TheoremViolation
from .model import PARTITION_LIMIT, Instance, Packing, exact_limit, format_rational
from .packers import opt_solve

THREE_QUARTERS = Fraction(3, 4)


def poa_bound_floor(ne_bins: int) -> int:
    """Fewest bins an optimum may use next to an NE with ``ne_bins`` bins (threshold 3/4)."""
    return math.ceil(Fraction(3 * ne_bins, 4) - Fraction(1, 2))


@dataclass(frozen=True)
class EquilibriumReport:
    instance_name: str | None
    n: int
    rule: CostRule
    packings: int
    ne_count: int
    min_ne_bins: int | None
    max_ne_bins: int | None
    opt_bins: int
    pos_ratio: Fraction | None
    poa_ratio: Fraction | None
    bound_ok: bool

    def to_json(self) -> dict[str, Any]:
        def rat(x: Fraction | None) -> str | None:
            return None if x is None else format_rational(x)

        return {
            "instance": self.instance_name,
            "n": self.n,
            "rule": format_rule(self.rule),
            "packings": self.packings,
            "ne_count": self.ne_count,
            "min_ne_bins": self.min_ne_bins,
            "max_ne_bins": self.max_ne_bins,
            "opt_bins": self.opt_bins,
            "pos_ratio": rat(self.pos_ratio),
            "poa_ratio": rat(self.poa_ratio),
            "bound_ok": self.bound_ok,
        }


def _check_size(instance: Instance, limit: int | None) -> None:
    limit = exact_limit(PARTITION_LIMIT) if limit is None else limit
    if len(instance) > limit:
        raise LimitExceededError(
            f"exhaustive enumeration limited to {limit} items, instance has {len(instance)}",
            n=len(instance), limit=limit)


def enumerate_packings(instance: Instance, limit: int | None = None) -> Iterator[Packing]:
    """Every valid packing exactly once.

    Items are placed in superiority order, each into an existing bin or the
    next new one, so bins come out ordered by their bottom item's rank.
    """
    _check_size(instance, limit)
    u = instance.units
    cap = instance.scale
    order = instance.order.order
    n = len(order)
    bins: list[list[int]] = []
    loads: list[int] = []

    def rec(k: int) -> Iterator[Packing]:
        if k == n:
            yield Packing(tuple(tuple(b) for b in bins))
            return
        item = order[k]
        s = u[item]
        for b in range(len(bins)):
            if loads[b] + s <= cap:
                bins[b].append(item)
                loads[b] += s
                yield from rec(k + 1)
                loads[b] -= s
                bins[b].pop()
        bins.append([item])
        loads.append(s)
        yield from rec(k + 1)
        loads.pop()
        bins.pop()

    return rec(0)


def enumerate_ne(rule: CostRule, instance: Instance, limit: int | None = None,
                 method: str = "both") -> list[Packing]:
    pricer = Pricer(rule, instance)
    return [p for p in enumerate_packings(instance, limit)
            if is_nash(rule, instance, p, method=method, pricer=pricer, validate=False)]


def measure(rule: CostRule, instance: Instance, limit: int | None = None,
            method: str = "both") -> EquilibriumReport:
    """Per-instance price of anarchy and stability by exhaustive enumeration."""
    pricer = Pricer(rule, instance)
    total = 0
    fewest = None
    ne_bins: list[int] = []
    for p in enumerate_packings(instance, limit):
        total += 1
        m = len(p.bins)
        fewest = m if fewest is None else min(fewest, m)
        if is_nash(rule, instance, p, method=method, pricer=pricer, validate=False):
            ne_bins.append(m)
    opt = opt_solve(instance).bins_used
    if opt != fewest:
        raise EngineInconsistency(
            f"branch and bound found {opt} bins, enumeration found {fewest}",
            instance=instance.name)
    if rule.is_local and rule.lam <= THREE_QUARTERS and not ne_bins:
        raise TheoremViolation(
            f"no NE exists at threshold {format_rational(rule.lam)}", instance=instance.name)
    lo = min(ne_bins) if ne_bins else None
    hi = max(ne_bins) if ne_bins else None
    return EquilibriumReport(
        instance_name=instance.name,
        n=len(instance),
        rule=rule,
        packings=total,
        ne_count=len(ne_bins),
        min_ne_bins=lo,
        max_ne_bins=hi,
        opt_bins=opt,
        pos_ratio=None if lo is None else Fraction(lo, opt),
        poa_ratio=None if hi is None else Fraction(hi, opt),
        bound_ok=hi is None or opt >= poa_bound_floor(hi),
    )


def pos_witness(instance: Instance, lam: Fraction = THREE_QUARTERS,
                limit: int | None = None) -> Packing:
    """An optimal packing that is also an NE at threshold ``lam`` (at most 3/4)."""
    lam = Fraction(lam)
    if lam > THREE_QUARTERS:
        raise ValueError("an optimal NE is only guaranteed for thresholds up to 3/4")
    rule = CostRule.local(lam)
    pricer = Pricer(rule, instance)
    opt = opt_solve(instance).bins_used
    for p in enumerate_packings(instance, limit):
        if len(p.bins) == opt and is_nash(rule, instance, p, pricer=pricer, validate=False):
            return p
    raise TheoremViolation(
        f"no optimal packing is an NE at threshold {format_rational(lam)}",
        instance=instance.name, opt_bins=opt)
