"""Unilateral and coalitional deviation analysis.

Move selection is deterministic everywhere: movers are scanned from the least
superior item upwards, targets by bin id ascending and then a fresh bin.
"""

from __future__ import annotations

import bisect
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence, Union

from .costs import CostRule, Pricer
from .errors import EngineInconsistency, LimitExceededError, NotAnEquilibriumError
from .model import (STRONG_NE_LIMIT, Instance, Packing, exact_limit, format_rational,
                    validate_packing)

log = logging.getLogger(__name__)

NEW_BIN = "new"

NE_REACHED = "NE_REACHED"
STEP_CAP = "STEP_CAP"
CYCLE_DETECTED = "CYCLE_DETECTED"

Target = Union[int, str]


@dataclass(frozen=True)
class Deviation:
    item: int
    source_bin: int
    target: Target
    cost_before: Fraction
    cost_after: Fraction

    @property
    def improving(self) -> bool:
        return self.cost_after < self.cost_before

    def to_json(self) -> dict[str, Any]:
        return {
            "item": self.item,
            "from": self.source_bin,
            "to": self.target,
            "cost_before": format_rational(self.cost_before),
            "cost_after": format_rational(self.cost_after),
        }


@dataclass(frozen=True)
class CoalitionDeviation:
    """Joint move of a coalition.

    ``moves`` maps each member to a surviving original bin id or to a fresh
    bin tagged ``"new:<k>"``; ``costs`` holds (before, after) per member.
    """

    moves: dict[int, Target]
    sources: dict[int, int]
    costs: dict[int, tuple[Fraction, Fraction]]

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(sorted(self.moves))

    def to_json(self) -> dict[str, Any]:
        return {"moves": [
            {"item": i, "from": self.sources[i], "to": self.moves[i],
             "cost_before": format_rational(self.costs[i][0]),
             "cost_after": format_rational(self.costs[i][1])}
            for i in self.members
        ]}


@dataclass(frozen=True)
class NashResult:
    is_ne: bool
    witness: Deviation | CoalitionDeviation | None = None

    def __bool__(self) -> bool:
        return self.is_ne


@dataclass(frozen=True)
class Trajectory:
    start: Packing
    steps: tuple[tuple[Packing, Deviation], ...]
    terminal: str
    final: Packing

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict[str, Any]:
        return {
            "terminal": self.terminal,
            "steps": [dict(d.to_json(), packing=[list(b) for b in p.bins]) for p, d in self.steps],
            "final": {"bins": [list(b) for b in self.final.bins]},
        }


class _Layout:
    """Rank-sorted bins and integer loads of one packing, for a given pricer."""

    __slots__ = ("bins", "loads", "bin_of", "costs")

    def __init__(self, pricer: Pricer, packing: Packing) -> None:
        rank = pricer.rank
        u = pricer.units
        self.bins = [sorted(b, key=rank.__getitem__) for b in packing.bins]
        self.loads = [sum(u[i] for i in b) for b in self.bins]
        self.bin_of = {i: k for k, b in enumerate(self.bins) for i in b}
        self.costs = {}
        for b in self.bins:
            self.costs.update(zip(b, pricer.bin_costs(b)))


def _insert(pricer: Pricer, items: list[int], item: int) -> list[int]:
    rank = pricer.rank
    keys = [rank[i] for i in items]
    pos = bisect.bisect_left(keys, rank[item])
    return items[:pos] + [item] + items[pos:]


def _scan_cost(pricer: Pricer, lay: _Layout) -> tuple[int, Target, Any] | None:
    u = pricer.units
    cap = pricer.capacity
    for item in reversed(pricer.instance.order.order):
        b = lay.bin_of[item]
        cur = lay.costs[item]
        for t, other in enumerate(lay.bins):
            if t == b or lay.loads[t] + u[item] > cap:
                continue
            after = pricer.cost_in(item, _insert(pricer, other, item))
            if after < cur:
                return item, t, after
        if pricer.full < cur:
            return item, NEW_BIN, pricer.full
    return None


def _superior_prefix(pricer: Pricer, items: Sequence[int], item: int) -> int:
    rank = pricer.rank
    r = rank[item]
    return sum(pricer.units[i] for i in items if rank[i] < r)


def _scan_threshold(pricer: Pricer, lay: _Layout) -> tuple[int, Target] | None:
    # Improvement test that never evaluates a cost: compare superior-prefix
    # sizes and loads against the threshold only.
    u = pricer.units
    cap = pricer.capacity
    lam = pricer.lam_units
    for item in reversed(pricer.instance.order.order):
        b = lay.bin_of[item]
        own = _superior_prefix(pricer, lay.bins[b], item)
        bottom = own == 0
        load = lay.loads[b]
        for t, other in enumerate(lay.bins):
            if t == b or lay.loads[t] + u[item] > cap:
                continue
            prefix = _superior_prefix(pricer, other, item)
            if own < lam and prefix > own:
                return item, t
            if bottom and load < lam and lay.loads[t] > load - u[item]:
                return item, t
        # a fresh bin has prefix 0 and load 0, so neither condition can hold
    return None


def _deviation(pricer: Pricer, lay: _Layout, item: int, target: Target, after=None) -> Deviation:
    b = lay.bin_of[item]
    if after is None:
        after = pricer.full if target == NEW_BIN else pricer.cost_in(
            item, _insert(pricer, lay.bins[target], item))
    return Deviation(item, b, target, pricer.to_fraction(lay.costs[item]),
                     pricer.to_fraction(after))


def find_improving_move(rule: CostRule, instance: Instance, packing: Packing,
                        pricer: Pricer | None = None) -> Deviation | None:
    """First strictly improving unilateral move, or ``None`` at an NE."""
    validate_packing(instance, packing)
    pricer = pricer or Pricer(rule, instance)
    lay = _Layout(pricer, packing)
    hit = _scan_cost(pricer, lay)
    if hit is None:
        return None
    return _deviation(pricer, lay, hit[0], hit[1], hit[2])


def is_nash(rule: CostRule, instance: Instance, packing: Packing, *, method: str = "both",
            pricer: Pricer | None = None, validate: bool = True) -> NashResult:
    """Nash test by exact cost comparison, by the threshold criterion, or both.

    With ``method="both"`` (the default for local rules) the two routes must
    return the same witness, otherwise :class:`EngineInconsistency` is raised.
    Baseline rules only support the cost route.
    """
    if validate:
        validate_packing(instance, packing)
    pricer = pricer or Pricer(rule, instance)
    if not rule.is_local:
        if method == "threshold":
            raise ValueError("threshold characterization only applies to local_size rules")
        method = "cost"
    lay = _Layout(pricer, packing)
    by_cost = by_threshold = None
    if method in ("cost", "both"):
        by_cost = _scan_cost(pricer, lay)
    if method in ("threshold", "both"):
        by_threshold = _scan_threshold(pricer, lay)
    if method == "both":
        cost_key = None if by_cost is None else by_cost[:2]
        if cost_key != by_threshold:
            raise EngineInconsistency(
                f"cost scan found {cost_key}, threshold scan found {by_threshold}",
                packing=[list(b) for b in packing.bins])
    elif method not in ("cost", "threshold"):
        raise ValueError(f"unknown method {method!r}")
    if by_cost is not None:
        return NashResult(False, _deviation(pricer, lay, *by_cost))
    if by_threshold is not None:
        return NashResult(False, _deviation(pricer, lay, *by_threshold))
    return NashResult(True)


def new_bin_improves(rule: CostRule, instance: Instance, packing: Packing, item: int,
                     pricer: Pricer | None = None) -> bool:
    """Whether moving ``item`` alone into an empty bin strictly lowers its cost."""
    pricer = pricer or Pricer(rule, instance)
    lay = _Layout(pricer, packing)
    return pricer.full < lay.costs[item]


def apply_move(packing: Packing, item: int, target: Target) -> Packing:
    bins = [list(b) for b in packing.bins]
    source = next(k for k, b in enumerate(bins) if item in b)
    bins[source].remove(item)
    if target == NEW_BIN:
        bins.append([item])
    else:
        bins[target].append(item)
    return Packing(tuple(tuple(b) for b in bins if b))


def best_response_dynamics(rule: CostRule, instance: Instance, start: Packing,
                           step_cap: int = 1000) -> Trajectory:
    """Apply the deterministic improving move until NE, ``step_cap`` moves, or a repeat."""
    if step_cap < 1:
        raise ValueError("step_cap must be at least 1")
    validate_packing(instance, start)
    pricer = Pricer(rule, instance)
    current = start
    seen = {current.key()}
    steps: list[tuple[Packing, Deviation]] = []
    while True:
        move = find_improving_move(rule, instance, current, pricer)
        if move is None:
            terminal = NE_REACHED
            break
        if len(steps) == step_cap:
            terminal = STEP_CAP
            break
        steps.append((current, move))
        current = apply_move(current, move.item, move.target)
        key = current.key()
        if key in seen:
            terminal = CYCLE_DETECTED
            break
        seen.add(key)
    log.debug("dynamics stopped after %d steps: %s", len(steps), terminal)
    return Trajectory(start, tuple(steps), terminal, current)


def is_strong_nash(rule: CostRule, instance: Instance, packing: Packing,
                   max_coalition: int | None = None, limit: int | None = None) -> NashResult:
    """Exhaustive search for a coalition whose joint move strictly helps every member.

    Non-members stay where they are.  Members may join any bin that keeps at
    least one non-member, or any number of fresh bins.  Coalitions are tried
    by size, then in rank order; the first one found is the witness.
    """
    validate_packing(instance, packing)
    limit = exact_limit(STRONG_NE_LIMIT) if limit is None else limit
    n = len(instance)
    if n > limit:
        raise LimitExceededError(
            f"strong-NE check is exhaustive; {n} items exceed the limit of {limit}",
            n=n, limit=limit)
    max_size = n if max_coalition is None else min(max_coalition, n)
    pricer = Pricer(rule, instance)
    lay = _Layout(pricer, packing)
    order = instance.order.order
    for size in range(1, max_size + 1):
        for coalition in itertools.combinations(order, size):
            found = _coalition_deviation(pricer, lay, coalition)
            if found is not None:
                return NashResult(False, found)
    return NashResult(True)


def _coalition_deviation(pricer: Pricer, lay: _Layout,
                         coalition: Sequence[int]) -> CoalitionDeviation | None:
    members = set(coalition)
    u = pricer.units
    rank = pricer.rank
    cap = pricer.capacity
    local = pricer.local
    table = pricer.table
    before = lay.costs
    # surviving bins: original id -> non-member items (rank order)
    bins: list[list[int]] = []
    ids: list[Target] = []
    for k, b in enumerate(lay.bins):
        rest = [i for i in b if i not in members]
        if rest:
            bins.append(rest)
            ids.append(k)
    loads = [sum(u[i] for i in b) for b in bins]
    fresh = 0
    choice: list[int] = []

    def superior_prefix(items: list[int], item: int) -> int | None:
        r = rank[item]
        total = 0
        any_superior = False
        for i in items:
            if rank[i] < r:
                total += u[i]
                any_superior = True
        return total if any_superior else None

    def place(pos: int) -> bool:
        nonlocal fresh
        if pos == len(coalition):
            return _all_improve()
        item = coalition[pos]
        s = u[item]
        for slot in range(len(bins) + 1):
            opening = slot == len(bins)
            if opening:
                bins.append([])
                loads.append(0)
                ids.append(f"new:{fresh}")
                fresh += 1
            if loads[slot] + s <= cap:
                ok = True
                if local:
                    prefix = superior_prefix(bins[slot], item)
                    if prefix is None:
                        # bottom: cost is at least the density over its own segment
                        ok = table[s] < before[item]
                    else:
                        ok = table[prefix + s] - table[prefix] < before[item]
                if ok:
                    bins[slot].append(item)
                    loads[slot] += s
                    choice.append(slot)
                    if place(pos + 1):
                        return True
                    choice.pop()
                    bins[slot].pop()
                    loads[slot] -= s
            if opening:
                bins.pop()
                loads.pop()
                ids.pop()
                fresh -= 1
        return False

    result: dict[str, CoalitionDeviation] = {}

    def _all_improve() -> bool:
        after: dict[int, Any] = {}
        for slot in set(choice):
            items = sorted(bins[slot], key=rank.__getitem__)
            for i, c in zip(items, pricer.bin_costs(items)):
                if i in members:
                    after[i] = c
        if all(after[i] < before[i] for i in coalition):
            result["dev"] = CoalitionDeviation(
                moves={i: ids[slot] for i, slot in zip(coalition, choice)},
                sources={i: lay.bin_of[i] for i in coalition},
                costs={i: (pricer.to_fraction(before[i]), pricer.to_fraction(after[i]))
                       for i in coalition},
            )
            return True
        return False

    place(0)
    return result.get("dev")


def apply_coalition(packing: Packing, deviation: CoalitionDeviation) -> Packing:
    members = set(deviation.moves)
    kept = [[i for i in b if i not in members] for b in packing.bins]
    fresh: dict[str, list[int]] = {}
    for i, target in deviation.moves.items():
        if isinstance(target, int):
            kept[target].append(i)
        else:
            fresh.setdefault(target, []).append(i)
    bins = [b for b in kept if b] + [fresh[t] for t in sorted(fresh)]
    return Packing(tuple(tuple(b) for b in bins))


def check_surplus_property(instance: Instance, ne_packing: Packing) -> bool:
    """Check the load-surplus property on an NE of the threshold-3/4 game.

    Bins are sorted by load (descending, ties by bottom rank).  For every bin
    whose load minus its smallest item is below 3/4, every heavier bin must
    overflow when that smallest item is added to it.
    """
    rule = CostRule.local(Fraction(3, 4))
    result = is_nash(rule, instance, ne_packing)
    if not result:
        raise NotAnEquilibriumError("packing is not an NE at threshold 3/4",
                                    witness=result.witness.to_json())
    rank = instance.order.rank
    u = instance.units
    cap = instance.scale
    bins = sorted(ne_packing.bins,
                  key=lambda b: (-sum(u[i] for i in b), min(rank[i] for i in b)))
    loads = [sum(u[i] for i in b) for b in bins]
    three_quarters = Fraction(3, 4) * cap
    for k, b in enumerate(bins):
        smallest = max(b, key=rank.__getitem__)
        if loads[k] - u[smallest] < three_quarters:
            if any(loads[j] + u[smallest] <= cap for j in range(k)):
                return False
    return True
