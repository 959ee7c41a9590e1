from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from sbpgame.costs import (CostRule, Pricer, bin_cost_vector, cumulative_density, format_rule,
                           packing_cost_vector, parse_rule)
from sbpgame.equilibrium import apply_move
from sbpgame.errors import ParseError, SBPError
from sbpgame.instances import FamilySpec, POA_LB, gen_family
from sbpgame.model import Instance, Packing

from helpers import ALL_RULES, LAMBDAS, LOCAL_RULES, instances
from oracles import brute_costs, valid_packings

F = Fraction


def density(rule, x):
    lam = float(rule.lam)
    if x >= lam:
        return 0.0
    if rule.density == "triangular":
        return 2 / lam - 2 * x / lam ** 2
    return 3 / lam * (1 - x / lam) ** 2


def integral(rule, a, b):
    hi = min(float(b), float(rule.lam))
    if hi <= float(a):
        return 0.0
    value, _ = quad(lambda x: density(rule, x), float(a), hi, epsabs=1e-13, epsrel=1e-13)
    return value


def test_rule_strings_round_trip():
    for text in ["local:3/4:triangular", "local:2/3:quadratic", "proportional", "egalitarian"]:
        assert format_rule(parse_rule(text)) == text
    assert parse_rule("local:6/8") == CostRule.local(F(3, 4), "triangular")


@pytest.mark.parametrize("text", ["local", "local:5/4", "local:0", "local:1/2:step", "shapley",
                                  "proportional:1/2"])
def test_bad_rule_strings(text):
    with pytest.raises(ParseError):
        parse_rule(text)


@pytest.mark.parametrize("lam, dens, x, expected", [
    (F(3, 4), "triangular", F(0), F(0)),
    (F(3, 4), "triangular", F(3, 4), F(1)),
    (F(3, 4), "triangular", F(1, 2), F(8, 9)),
    (F(2, 3), "quadratic", F(1), F(1)),
])
def test_cumulative_density_examples(lam, dens, x, expected):
    rule = CostRule.local(lam, dens)
    assert abs(integral(rule, 0, x) - float(expected)) < 1e-12
    assert cumulative_density(rule, x) == expected


@pytest.mark.parametrize("rule", LOCAL_RULES, ids=str)
@pytest.mark.parametrize("x", [F(k, 24) for k in range(25)])
def test_cumulative_matches_quadrature(rule, x):
    assert abs(integral(rule, 0, x) - float(cumulative_density(rule, x))) < 1e-12


@pytest.mark.parametrize("rule", LOCAL_RULES, ids=str)
def test_cumulative_shape(rule):
    grid = [F(k, 60) for k in range(61)]
    values = [cumulative_density(rule, x) for x in grid]
    assert values[0] == 0
    for x, lo, hi in zip(grid[1:], values, values[1:]):
        if x <= rule.lam:
            assert hi > lo
        else:
            assert hi == 1


def test_cumulative_rejects_out_of_range():
    with pytest.raises(ValueError):
        cumulative_density(CostRule.local("1/2"), F(3, 2))
    with pytest.raises(SBPError):
        cumulative_density(CostRule("proportional"), F(1, 2))


@pytest.mark.parametrize("rule, sizes, expected", [
    ("local:3/4:triangular", ["3/4"], ["1"]),
    ("local:3/4:triangular", ["1/2", "1/4"], ["8/9", "1/9"]),
    ("local:2/3:triangular", ["1/3", "1/3", "1/6"], ["3/4", "1/4", "0"]),
    ("proportional", ["1/2", "1/4"], ["2/3", "1/3"]),
    ("egalitarian", ["1/5", "3/5"], ["1/2", "1/2"]),
])
def test_bin_cost_examples(rule, sizes, expected):
    rule = parse_rule(rule)
    inst = Instance.from_strings(sizes)
    costs = bin_cost_vector(rule, inst, range(len(inst)))
    assert costs == {i: F(e) for i, e in enumerate(map(F, expected))}
    if rule.is_local:
        # independent check: top item pays its segment plus the unused share
        # up to the threshold, others pay their own segment
        load = inst.total_size()
        order = inst.order.order
        prefix = F(0)
        for pos, i in enumerate(order):
            approx = integral(rule, prefix, prefix + inst.sizes[i])
            if pos == 0:
                approx += integral(rule, load, 1)
            assert abs(approx - float(costs[i])) < 1e-12
            prefix += inst.sizes[i]


def test_bin_cost_errors():
    inst = Instance.from_strings(["2/3", "1/2"])
    with pytest.raises(SBPError):
        bin_cost_vector(CostRule.local("3/4"), inst, [])
    with pytest.raises(SBPError):
        bin_cost_vector(CostRule.local("3/4"), inst, [0, 1])


def test_packing_cost_vector_examples():
    inst = Instance.from_strings(["1/2", "1/2"])
    for rule in ALL_RULES:
        assert sum(packing_cost_vector(rule, inst, Packing.of([[0], [1]])).values()) == 2
    single = Instance.from_strings(["3/4"])
    for rule in LOCAL_RULES:
        assert packing_cost_vector(rule, single, Packing.of([[0]])) == {0: 1}


def test_example_tiny_items_pay_nothing():
    gen = gen_family(FamilySpec(POA_LB, k=2))
    costs = packing_cost_vector(CostRule.local("2/3"), gen.instance, gen.ref_ne)
    eps = F(1, 6)
    assert all(costs[i] == 0 for i, s in enumerate(gen.instance.sizes) if s == eps)


@settings(max_examples=60, deadline=None)
@given(instances(max_n=6))
def test_three_routes_agree_bit_for_bit(inst):
    """Closed-form Fractions, the integer kernel and the brute definition agree exactly."""
    for rule in ALL_RULES:
        pricer = Pricer(rule, inst)
        for bins in valid_packings(inst):
            packing = Packing.of(bins)
            a = packing_cost_vector(rule, inst, packing)
            b = pricer.costs(packing)
            c = brute_costs(rule, inst, bins)
            for i in a:
                assert (a[i].numerator, a[i].denominator) == (b[i].numerator, b[i].denominator)
                assert a[i] == c[i]


@settings(max_examples=80, deadline=None)
@given(instances(max_n=7), st.data())
def test_normalization_and_monotonicity(inst, data):
    bins = data.draw(st.sampled_from(list(valid_packings(inst))))
    for rule in ALL_RULES:
        for b in bins:
            costs = bin_cost_vector(rule, inst, b)
            assert sum(costs.values()) == 1
            assert all(c >= 0 for c in costs.values())
            if rule.is_local:
                ranked = inst.order.sort(b)
                assert all(costs[x] >= costs[y] for x, y in zip(ranked, ranked[1:]))


@settings(max_examples=80, deadline=None)
@given(instances(max_n=7), st.data())
def test_bottom_residual(inst, data):
    bins = data.draw(st.sampled_from(list(valid_packings(inst))))
    for rule in LOCAL_RULES:
        for b in bins:
            costs = bin_cost_vector(rule, inst, b)
            top = inst.order.sort(b)[0]
            load = inst.load(b)
            F_ = rule.cumulative
            assert costs[top] == F_(inst.sizes[top]) + 1 - F_(load)
            if load >= rule.lam:
                assert costs[top] == F_(inst.sizes[top])


@settings(max_examples=80, deadline=None)
@given(instances(min_n=2, max_n=7), st.data())
def test_migration_leaves_superior_non_bottom_costs_unchanged(inst, data):
    packings = list(valid_packings(inst))
    bins = data.draw(st.sampled_from(packings))
    if len(bins) < 2:
        return
    src = data.draw(st.integers(0, len(bins) - 1))
    dst = data.draw(st.sampled_from([k for k in range(len(bins)) if k != src]))
    item = data.draw(st.sampled_from(bins[src]))
    if inst.load(bins[dst]) + inst.sizes[item] > 1:
        return
    before_p = Packing.of(bins)
    after_p = apply_move(before_p, item, dst)
    rank = inst.order.rank
    watched = []
    for b in (bins[src], bins[dst]):
        ranked = inst.order.sort(b)
        watched += [x for x in ranked[1:] if rank[x] < rank[item]]
    for rule in LOCAL_RULES:
        before = packing_cost_vector(rule, inst, before_p)
        after = packing_cost_vector(rule, inst, after_p)
        for x in watched:
            assert before[x] == after[x]


@pytest.mark.parametrize("lam", LAMBDAS, ids=str)
def test_cross_density_ordinal_agreement(lam):
    """For each item, ranking of its possible positions does not depend on the density."""
    tri, quad_ = CostRule.local(lam, "triangular"), CostRule.local(lam, "quadratic")
    cases = [Instance.from_strings(s) for s in (
        ["1/2", "1/4", "1/4", "1/6", "1/12"],
        ["1/3", "1/3", "1/6", "1/6", "1/12", "1/12"],
        ["5/12", "1/3", "1/4", "1/6", "1/12"],
        ["7/12", "1/4", "1/6", "1/12", "1/12", "1/12"],
    )]
    for inst in cases:
        for bins in valid_packings(inst):
            for item in range(len(inst)):
                positions = []
                for k, b in enumerate(bins):
                    rest = [x for x in b if x != item]
                    if item in b or inst.load(rest) + inst.sizes[item] <= 1:
                        positions.append(rest + [item])
                positions.append([item])
                costs = {}
                for rule in (tri, quad_):
                    costs[rule] = [bin_cost_vector(rule, inst, pos)[item] for pos in positions]
                for a in range(len(positions)):
                    for b in range(a + 1, len(positions)):
                        sign = [(c[a] > c[b]) - (c[a] < c[b]) for c in costs.values()]
                        assert sign[0] == sign[1]
