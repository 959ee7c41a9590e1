"""Best-Fit / First-Fit Decreasing and an exact branch-and-bound solver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .errors import LimitExceededError
from .model import OPT_LIMIT, Instance, Packing

BFD = "bfd"
FFD = "ffd"
OPT = "opt"


@dataclass(frozen=True)
class Placement:
    item: int
    bin: int
    opened: bool


@dataclass(frozen=True)
class PackerResult:
    packing: Packing
    algorithm: str
    trace: tuple[Placement, ...] | None = None

    @property
    def bins_used(self) -> int:
        return len(self.packing.bins)

    def to_json(self, instance: Instance, with_trace: bool = False) -> dict[str, Any]:
        from .instances import packing_to_json

        out = packing_to_json(self.packing.canonical(instance))
        out["bins_used"] = self.bins_used
        if with_trace and self.trace is not None:
            out["trace"] = [{"item": p.item, "bin": p.bin, "opened": p.opened} for p in self.trace]
        return out


def _decreasing_fit(instance: Instance, best: bool) -> tuple[list[list[int]], list[Placement]]:
    u = instance.units
    cap = instance.scale
    bins: list[list[int]] = []
    loads: list[int] = []
    trace: list[Placement] = []
    for item in instance.order.order:
        chosen = None
        for k, load in enumerate(loads):
            if load + u[item] <= cap:
                if not best:
                    chosen = k
                    break
                # strict comparison keeps the earliest-opened bin on ties
                if chosen is None or load > loads[chosen]:
                    chosen = k
        if chosen is None:
            bins.append([item])
            loads.append(u[item])
            trace.append(Placement(item, len(bins) - 1, True))
        else:
            bins[chosen].append(item)
            loads[chosen] += u[item]
            trace.append(Placement(item, chosen, False))
    return bins, trace


def bfd_pack(instance: Instance) -> PackerResult:
    """Best Fit Decreasing: each item goes to the fullest bin it still fits in."""
    bins, trace = _decreasing_fit(instance, best=True)
    return PackerResult(Packing.of(bins), BFD, tuple(trace))


def ffd_pack(instance: Instance) -> PackerResult:
    bins, trace = _decreasing_fit(instance, best=False)
    return PackerResult(Packing.of(bins), FFD, tuple(trace))


def lower_bound(instance: Instance) -> int:
    """Ceiling of the total size."""
    return -(-sum(instance.units) // instance.scale)


def opt_solve(instance: Instance, limit: int = OPT_LIMIT) -> PackerResult:
    """Minimum-bin packing by depth-first branch and bound.

    Items are placed in superiority order.  An item either joins an open bin
    (bins with equal load are interchangeable, so only the first of them is
    tried) or opens the next bin.  Subtrees are cut when the bins already open
    plus the ceiling of the unplaced volume beyond the free space cannot beat
    the incumbent, and repeated (position, load multiset) states are skipped.
    """
    n = len(instance)
    if n > limit:
        raise LimitExceededError(
            f"exact solver limited to {limit} items, instance has {n}", n=n, limit=limit)
    u = instance.units
    cap = instance.scale
    order = instance.order.order
    sizes = [u[i] for i in order]
    suffix = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + sizes[k]
    floor_bins = lower_bound(instance)

    incumbent = _decreasing_fit(instance, best=False)[0]
    best = {"bins": [list(b) for b in incumbent]}
    if len(incumbent) == floor_bins:
        return PackerResult(Packing.of(incumbent), OPT)

    loads: list[int] = []
    assign: list[int] = [0] * n
    seen: set[tuple[int, tuple[int, ...]]] = set()

    def search(k: int) -> bool:
        # returns True once the incumbent matches the global lower bound
        if k == n:
            if len(loads) < len(best["bins"]):
                bins: list[list[int]] = [[] for _ in loads]
                for pos, b in enumerate(assign):
                    bins[b].append(order[pos])
                best["bins"] = bins
            return len(best["bins"]) == floor_bins
        free = cap * len(loads) - sum(loads)
        extra = max(0, suffix[k] - free)
        if len(loads) + -(-extra // cap) >= len(best["bins"]):
            return False
        state = (k, tuple(sorted(loads)))
        if state in seen:
            return False
        seen.add(state)
        s = sizes[k]
        tried: set[int] = set()
        for b, load in enumerate(loads):
            if load + s <= cap and load not in tried:
                tried.add(load)
                loads[b] += s
                assign[k] = b
                if search(k + 1):
                    return True
                loads[b] -= s
        if len(loads) + 1 < len(best["bins"]):
            loads.append(s)
            assign[k] = len(loads) - 1
            if search(k + 1):
                return True
            loads.pop()
        return False

    search(0)
    return PackerResult(Packing.of(best["bins"]), OPT)
