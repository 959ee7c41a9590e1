"""Exact engine for the selfish bin packing game under local-size-based cost sharing."""

from .costs import (CostRule, Pricer, bin_cost_vector, cumulative_density, packing_cost_vector,
                    parse_rule)
from .enumeration import EquilibriumReport, enumerate_ne, enumerate_packings, measure, pos_witness
from .equilibrium import (NEW_BIN, CoalitionDeviation, Deviation, Trajectory,
                          best_response_dynamics, check_surplus_property, find_improving_move,
                          is_nash, is_strong_nash)
from .errors import SBPError
from .instances import FamilySpec, gen_family, random_instance, random_suite
from .model import (Instance, Packing, SuperiorityOrder, parse_rational, superiority_order,
                    validate_packing)
from .packers import PackerResult, bfd_pack, ffd_pack, opt_solve

__version__ = "0.1.0"

__all__ = [
    "CoalitionDeviation", "CostRule", "Deviation", "EquilibriumReport", "FamilySpec", "Instance",
    "NEW_BIN", "PackerResult", "Packing", "Pricer", "SBPError", "SuperiorityOrder", "Trajectory",
    "best_response_dynamics", "bfd_pack", "bin_cost_vector", "check_surplus_property",
    "cumulative_density", "enumerate_ne", "enumerate_packings", "ffd_pack", "find_improving_move",
    "gen_family", "is_nash", "is_strong_nash", "measure", "opt_solve", "packing_cost_vector",
    "parse_rational", "parse_rule", "pos_witness", "random_instance", "random_suite",
    "superiority_order", "validate_packing",
]
