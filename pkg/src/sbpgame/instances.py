"""Instance families, seeded random instances and the JSON formats."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator

from .errors import InvalidInstanceError, ParseError
from .model import Instance, Packing, format_rational, parse_rational, validate_packing

POA_LB = "poa_lb_half"
RANDOM = "uniform_grid_random"


@dataclass(frozen=True)
class FamilySpec:
    family: str
    k: int | None = None
    n: int | None = None
    grid: int = 12
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family == POA_LB:
            if self.k is None or self.k < 1:
                raise InvalidInstanceError("poa_lb_half needs k >= 1")
        elif self.family == RANDOM:
            if self.n is None or self.n < 1:
                raise InvalidInstanceError("random family needs n >= 1")
            if self.grid < 2:
                raise InvalidInstanceError("grid denominator must be at least 2")
        else:
            raise InvalidInstanceError(f"unknown family {self.family!r}")


@dataclass(frozen=True)
class Generated:
    instance: Instance
    ref_ne: Packing | None = None
    ref_opt: Packing | None = None
    degenerate: bool = False


def gen_family(spec: FamilySpec) -> Generated:
    if spec.family == POA_LB:
        return _poa_lb(spec.k)
    return Generated(random_instance(spec.n, spec.grid, spec.seed))


def _poa_lb(k: int) -> Generated:
    # 2k items of 2/3, then 2k of 1/3, then 3k of eps = 1/(3k)
    eps = Fraction(1, 3 * k)
    sizes = [Fraction(2, 3)] * (2 * k) + [Fraction(1, 3)] * (2 * k) + [eps] * (3 * k)
    big = list(range(2 * k))
    third = list(range(2 * k, 4 * k))
    tiny = list(range(4 * k, 7 * k))
    ne = [(big[j], tiny[j]) for j in range(2 * k)]
    ne += [(third[2 * j], third[2 * j + 1], tiny[2 * k + j]) for j in range(k)]
    opt = [(big[j], third[j]) for j in range(2 * k)] + [tuple(tiny)]
    return Generated(
        Instance(tuple(sizes), f"poa_lb_half_k{k}"),
        ref_ne=Packing.of(ne),
        ref_opt=Packing.of(opt),
        degenerate=k == 1,
    )


def random_instance(n: int, grid: int = 12, seed: int = 0, name: str | None = None) -> Instance:
    """``n`` sizes drawn uniformly from {1/grid, ..., grid/grid}."""
    rng = random.Random(seed)
    sizes = tuple(Fraction(rng.randint(1, grid), grid) for _ in range(n))
    return Instance(sizes, name or f"random_n{n}_g{grid}_s{seed}")


def random_suite(trials: int, n_max: int, grid: int = 12, seed: int = 0,
                 n_min: int | None = None) -> Iterator[Instance]:
    """Seeded stream of random instances with item counts in [n_min, n_max].

    ``n_min`` defaults to ``n_max // 2`` (at least 1).
    """
    n_min = max(1, n_max // 2) if n_min is None else n_min
    rng = random.Random(seed)
    for t in range(trials):
        n = rng.randint(n_min, n_max)
        sub_seed = rng.getrandbits(32)
        yield random_instance(n, grid, sub_seed, name=f"t{t:04d}")


# -- JSON ---------------------------------------------------------------------

def _dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def instance_to_json(instance: Instance) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if instance.name is not None:
        out["name"] = instance.name
    out["sizes"] = [format_rational(s) for s in instance.sizes]
    return out


def dump_instance(instance: Instance) -> str:
    return _dumps(instance_to_json(instance))


def instance_from_json(obj: Any) -> Instance:
    if not isinstance(obj, dict) or "sizes" not in obj:
        raise ParseError("instance JSON must be an object with a 'sizes' list")
    sizes = obj["sizes"]
    name = obj.get("name")
    if not isinstance(sizes, list):
        raise ParseError("'sizes' must be a list")
    if name is not None and not isinstance(name, str):
        raise ParseError("'name' must be a string")
    return Instance(tuple(parse_rational(s) for s in sizes), name)


def load_instance(text: str) -> Instance:
    return instance_from_json(_loads(text))


def packing_to_json(packing: Packing) -> dict[str, Any]:
    return {"bins": [list(b) for b in packing.bins]}


def dump_packing(packing: Packing, instance: Instance) -> str:
    """Canonical text: bins by bottom rank, indices ascending."""
    return _dumps(packing_to_json(packing.canonical(instance)))


def packing_from_json(obj: Any, instance: Instance) -> Packing:
    if not isinstance(obj, dict) or not isinstance(obj.get("bins"), list):
        raise ParseError("packing JSON must be an object with a 'bins' list")
    bins = obj["bins"]
    for b in bins:
        if not isinstance(b, list) or not all(isinstance(i, int) and not isinstance(i, bool)
                                              for i in b):
            raise ParseError("each bin must be a list of integer item indices")
    packing = Packing.of(bins)
    validate_packing(instance, packing)
    return packing


def load_packing(text: str, instance: Instance) -> Packing:
    return packing_from_json(_loads(text), instance)


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None

