import math
from fractions import Fraction

import pytest
from hypothesis import given, settings

from sbpgame.errors import LimitExceededError
from sbpgame.instances import FamilySpec, POA_LB, gen_family, random_suite
from sbpgame.model import Instance, is_valid_packing
from sbpgame.packers import bfd_pack, ffd_pack, lower_bound, opt_solve

from helpers import instances
from oracles import brute_opt

F = Fraction


def sizes_of(inst, packing):
    return [[inst.sizes[i] for i in inst.order.sort(b)] for b in packing.bins]


def test_bfd_on_example_k1():
    inst = gen_family(FamilySpec(POA_LB, k=1)).instance
    res = bfd_pack(inst)
    assert res.bins_used == 3
    assert sizes_of(inst, res.packing) == [[F(2, 3), F(1, 3)], [F(2, 3), F(1, 3)],
                                           [F(1, 3)] * 3]


@pytest.mark.parametrize("packer", [bfd_pack, ffd_pack])
def test_small_examples(packer):
    assert packer(Instance.from_strings(["3/5", "2/5"])).bins_used == 1
    res = packer(Instance.from_strings(["1/2", "1/2", "1/2"]))
    assert res.packing.bins == ((0, 1), (2,))


def test_bfd_picks_tightest_and_ffd_picks_first():
    # the last item 1/12 fits the 5/6-bin and the fuller {1/2, 5/12}-bin
    inst = Instance.from_strings(["5/12", "5/6", "1/12", "3/4", "1/2"])
    assert ffd_pack(inst).packing.bins == ((1, 2), (3,), (0, 4))
    assert bfd_pack(inst).packing.bins == ((1,), (3,), (0, 2, 4))


def test_bfd_ties_go_to_earliest_bin():
    inst = Instance.from_strings(["3/5", "3/5", "1/4", "1/4"])
    trace = bfd_pack(inst).trace
    # both bins sit at load 3/5 when the first 1/4 arrives
    assert [(p.item, p.bin) for p in trace] == [(0, 0), (1, 1), (2, 0), (3, 1)]


def test_trace_records_openings():
    res = ffd_pack(Instance.from_strings(["1/2", "1/2", "1/2"]))
    assert [p.opened for p in res.trace] == [True, False, True]
    out = res.to_json(Instance.from_strings(["1/2", "1/2", "1/2"]), with_trace=True)
    assert out["bins_used"] == 2 and len(out["trace"]) == 3


def test_example_family_bfd_equals_ffd():
    for k in (1, 2, 3, 4):
        inst = gen_family(FamilySpec(POA_LB, k=k)).instance
        assert bfd_pack(inst).bins_used == ffd_pack(inst).bins_used


def test_opt_examples():
    inst = gen_family(FamilySpec(POA_LB, k=2)).instance
    assert opt_solve(inst).bins_used == 5
    assert opt_solve(Instance((F(1),) * 7)).bins_used == 7


def test_opt_limit():
    with pytest.raises(LimitExceededError):
        opt_solve(Instance((F(1, 30),) * 25))
    assert opt_solve(Instance((F(1, 30),) * 25), limit=25).bins_used == 1


@settings(max_examples=150, deadline=None)
@given(instances(max_n=8))
def test_packers_are_valid_and_bounded(inst):
    opt = opt_solve(inst)
    for res in (bfd_pack(inst), ffd_pack(inst), opt):
        assert is_valid_packing(inst, res.packing)
        assert res.bins_used <= len(inst)
        assert res.bins_used >= opt.bins_used
    assert opt.bins_used >= lower_bound(inst) == math.ceil(inst.total_size())
    assert opt.bins_used == brute_opt(inst)


def test_opt_hard_cases_against_enumeration():
    # sizes chosen so FFD is not optimal and the volume bound is not tight
    inst = Instance.from_strings(["5/12", "5/12", "1/3", "1/3", "1/4", "1/4"])
    assert opt_solve(inst).bins_used == brute_opt(inst) == 2
    for inst in random_suite(25, 9, grid=20, seed=11):
        assert opt_solve(inst).bins_used == brute_opt(inst)


def test_bfd_ratio_bound_on_random_suite():
    for inst in random_suite(60, 14, seed=5):
        assert bfd_pack(inst).bins_used <= F(11, 9) * opt_solve(inst).bins_used + 1
