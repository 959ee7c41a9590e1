"""Shared strategies, rule lists and the acceptance report buffer."""

from fractions import Fraction

from hypothesis import strategies as st

from sbpgame import CostRule, Instance

LAMBDAS = (Fraction(1, 2), Fraction(2, 3), Fraction(3, 4))

LOCAL_RULES = [CostRule.local(lam, d) for lam in LAMBDAS for d in ("triangular", "quadratic")]
ALL_RULES = LOCAL_RULES + [CostRule("proportional"), CostRule("egalitarian")]


def instances(min_n: int = 1, max_n: int = 6, grid: int = 12):
    """Hypothesis strategy for small grid instances, biased toward small items."""
    size = st.one_of(st.integers(1, grid // 2), st.integers(1, grid))
    return st.lists(size, min_size=min_n, max_size=max_n).map(
        lambda ks: Instance(tuple(Fraction(k, grid) for k in ks)))


ACCEPTANCE_LINES: list[str] = []
