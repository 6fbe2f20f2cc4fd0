import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sawtree.errors import BudgetExceeded, InvalidInput
from sawtree.gallery import (
    GraftSpec,
    PeriodicTree,
    b_ary,
    binary,
    graft,
    join,
    parse_tree_spec,
    path_polynomial,
    periodic_closure,
    periodic_critical_lambda,
    ray,
    ss_tree_prop4,
    ss_tree_prop5,
    ss_tree_prop5_bar,
)
from sawtree.trees import FiniteTree, growth_estimate, level_count


def _bfs_sizes(tree, n):
    level, sizes = [tree.root()], [1]
    for _ in range(n):
        level = [c for v in level for c in tree.children(v)]
        sizes.append(len(level))
    return sizes


def test_constant_profiles():
    assert ray().level_counts(5) == [1] * 6
    assert binary().level_counts(5) == [2**n for n in range(6)]
    assert b_ary(3).level_counts(4) == [1, 3, 9, 27, 81]
    with pytest.raises(InvalidInput):
        b_ary(0)


@pytest.mark.parametrize("tree", [
    ss_tree_prop5(Fraction(3, 2)),
    ss_tree_prop5_bar(2),
    ss_tree_prop4(2, 1),
    join(binary(), ray()),
    periodic_closure(FiniteTree.parse("(()(()))")),
], ids=repr)
def test_closed_form_sizes_match_bfs(tree):
    assert tree.level_counts(10) == _bfs_sizes(tree, 10)


def test_prop5_exact_floors():
    t = ss_tree_prop5(Fraction(3, 2))
    sizes = t.level_counts(60)
    x = Fraction(3, 2)
    for n in range(1, 61):
        # |T_n| is the largest multiple of |T_{n-1}| not above x**n
        assert sizes[n] <= x**n < sizes[n] + sizes[n - 1]


def test_prop4_decay_sandwich():
    x, k = Fraction(2), 1
    sizes = ss_tree_prop4(x, k).level_counts(30)
    for n in range(1, 31):
        bound = x**n / n**k
        assert sizes[n] <= bound < sizes[n] + sizes[n - 1]


def test_finite_tree_parse_roundtrip():
    text = "(()(()()))"
    t = FiniteTree.parse(text)
    assert t.to_parens() == text
    assert t.size == 5 and t.height() == 2
    assert sorted(t.leaf_depths()) == [1, 2, 2]
    for bad in ["", "(()", "())", "()()", "(x)"]:
        with pytest.raises(InvalidInput):
            FiniteTree.parse(bad)


def test_join_structure():
    t = join(binary(), ray())
    assert len(t.children(t.root())) == 2
    assert t.level_counts(5) == [1, 2, 3, 5, 9, 17]


def test_graft_matches_text_oracle():
    host, scion = "((())())", "(()())"
    sites = [(0, 0), (1,)]
    t = graft(GraftSpec(FiniteTree.parse(host), sites, FiniteTree.parse(scion)))
    expected = oracles.graft_parens(host, sites, scion)
    sizes = oracles.level_sizes(oracles.parse_parens(expected))
    assert t.level_counts(len(sizes)) == sizes + [0]
    with pytest.raises(InvalidInput):
        graft(GraftSpec(FiniteTree.parse(host), [(5,)], FiniteTree.parse(scion)))


def test_graft_infinite_scion():
    t = graft(GraftSpec(FiniteTree.parse("(()())"), [(0,)], ray()))
    assert t.level_counts(6) == [1, 2, 1, 1, 1, 1, 1]


def test_periodic_closure_counts_and_critical_value():
    base = FiniteTree.parse("(()(()))")
    t = periodic_closure(base)
    assert isinstance(t, PeriodicTree)
    # leaves at depths 1 and 2 give Fibonacci level sizes
    assert t.level_counts(8) == [1, 2, 3, 5, 8, 13, 21, 34, 55]
    assert path_polynomial(base) == [0, 1, 1]
    lam = periodic_critical_lambda(base)
    assert lam == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-10)
    binary_base = FiniteTree.parse("(()())")
    assert periodic_critical_lambda(binary_base) == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(InvalidInput):
        periodic_closure(FiniteTree.parse("()"))


def test_growth_estimate():
    g = growth_estimate(binary(), 10)
    assert all(c == 2**n and r == pytest.approx(2) for n, (c, r) in enumerate(g, 1))
    assert level_count(b_ary(3), 4) == 81


@pytest.mark.parametrize("spec,sizes", [
    ("ray", [1, 1, 1]),
    ("bary:3", [1, 3, 9]),
    ("prop5:x=2", [1, 2, 4]),
    ("prop5bar:x=2", [1, 4, 8]),
    ("finite:(()())", [1, 2, 0]),
    ("periodic:(()())", [1, 2, 4]),
    ("saw:halfplane,pruned", [1, 3, 7]),
    ("saw:plane", [1, 4, 12]),
    ("join[ray|join[ray|ray]]", [1, 2, 3]),
])
def test_parse_tree_spec(spec, sizes):
    assert parse_tree_spec(spec).level_counts(2) == sizes


@pytest.mark.parametrize("spec", ["tree", "bary:x", "prop5", "prop4:x=2", "join[ray]", "prop5:x=1/2"])
def test_parse_tree_spec_rejects(spec):
    with pytest.raises(InvalidInput):
        parse_tree_spec(spec)


def test_periodic_from_file(tmp_path):
    f = tmp_path / "base.txt"
    f.write_text("(()(()))\n")
    assert parse_tree_spec(f"periodic:{f}").level_counts(3) == [1, 2, 3, 5]


def test_level_count_budget():
    with pytest.raises(BudgetExceeded):
        parse_tree_spec("saw:plane").level_counts(14, budget=1000)


trees_text = st.recursive(
    st.just("()"),
    lambda inner: st.lists(inner, min_size=1, max_size=3).map(lambda xs: "(" + "".join(xs) + ")"),
    max_leaves=12,
)


@settings(max_examples=100, deadline=None)
@given(text=trees_text)
def test_finite_tree_levels_match_oracle(text):
    t = FiniteTree.parse(text)
    expected = oracles.level_sizes(oracles.parse_parens(text))
    assert t.level_counts(len(expected) - 1) == expected
    assert t.to_parens() == text
