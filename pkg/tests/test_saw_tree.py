import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sawtree.errors import BudgetExceeded, InvalidInput
from sawtree.lattice import (
    CLOSED_HALF_PLANE,
    FIRST_QUADRANT,
    FULL_PLANE,
    ORIGIN,
    UPPER_HALF_PLANE,
    DomainSpec,
    LatticePoint,
    strip,
)
from sawtree.saw_tree import (
    FiniteWalk,
    Occupancy,
    as_tree,
    escapes,
    extensions,
    has_infinite_extension,
)

DOMAINS = [FULL_PLANE, CLOSED_HALF_PLANE, UPPER_HALF_PLANE, FIRST_QUADRANT, strip(1), strip(2), strip(3)]


# --- lattice ----------------------------------------------------------------


@pytest.mark.parametrize("text,expected", [
    ("plane", FULL_PLANE),
    ("halfplane", CLOSED_HALF_PLANE),
    ("upperhalfplane", UPPER_HALF_PLANE),
    ("quadrant", FIRST_QUADRANT),
    ("strip:4", strip(4)),
    (" Strip:2 ", strip(2)),
])
def test_domain_parse(text, expected):
    assert DomainSpec.parse(text) == expected
    assert DomainSpec.parse(str(expected)) == expected


@pytest.mark.parametrize("text", ["disc", "strip:0", "strip:x", "strip:-1"])
def test_domain_parse_rejects(text):
    with pytest.raises(InvalidInput):
        DomainSpec.parse(text)


def test_domain_membership():
    assert UPPER_HALF_PLANE.contains((0, 0)) and not UPPER_HALF_PLANE.contains((1, 0))
    assert CLOSED_HALF_PLANE.contains((-5, 0)) and not CLOSED_HALF_PLANE.contains((0, -1))
    assert not FIRST_QUADRANT.contains((-1, 3))
    assert strip(2).contains((9, 2)) and not strip(2).contains((0, 3))
    assert FULL_PLANE.neighbors(ORIGIN) == {(1, 0), (0, 1), (-1, 0), (0, -1)}
    assert FIRST_QUADRANT.neighbors(ORIGIN) == {(1, 0), (0, 1)}
    with pytest.raises(InvalidInput):
        FIRST_QUADRANT.neighbors((-1, 0))


# --- walks ------------------------------------------------------------------


def test_finite_walk_validation():
    w = FiniteWalk.from_moves("ENWW")
    assert len(w) == 4 and w.endpoint == LatticePoint(-1, 1)
    assert w.moves() == "ENWW"
    assert w.prefix(2).moves() == "EN"
    with pytest.raises(InvalidInput):
        FiniteWalk.from_moves("ENWS")  # returns to origin
    with pytest.raises(InvalidInput):
        FiniteWalk(((0, 0), (2, 0)))
    with pytest.raises(InvalidInput):
        FiniteWalk(((1, 0), (2, 0)))
    with pytest.raises(InvalidInput):
        FiniteWalk.from_moves("EQ")


def test_extensions_order_and_domain():
    w = FiniteWalk.from_moves("E")
    assert [x.moves() for x in extensions(w, FULL_PLANE)] == ["EE", "EN", "ES"]
    assert [x.moves() for x in extensions(w, CLOSED_HALF_PLANE)] == ["EE", "EN"]
    with pytest.raises(InvalidInput):
        extensions(FiniteWalk.from_moves("S"), CLOSED_HALF_PLANE)


def test_trapped_walk_has_no_infinite_extension():
    # spiral into a closed pocket
    w = FiniteWalk.from_moves("NNEEESSSWWN")
    assert not has_infinite_extension(w, FULL_PLANE)
    assert has_infinite_extension(FiniteWalk.from_moves("NNEEESSSWW"), FULL_PLANE)
    # the axis closes this pocket in the half-plane but not in the plane
    w = FiniteWalk.from_moves("WNNEEESSW")
    assert has_infinite_extension(w, FULL_PLANE)
    assert not has_infinite_extension(w, CLOSED_HALF_PLANE)


@pytest.mark.parametrize("domain", DOMAINS, ids=str)
def test_level_counts_match_oracle(domain):
    n = 8
    assert as_tree(domain).level_counts(n) == oracles.naive_saw_counts(n, domain.contains)
    assert as_tree(domain, pruned=True).level_counts(n) == oracles.naive_pruned_counts(n, domain.contains)


@pytest.mark.parametrize("domain", [FULL_PLANE, CLOSED_HALF_PLANE, strip(2)], ids=str)
def test_lazy_children_match_backtracking(domain):
    tree = as_tree(domain, pruned=True)
    level = [tree.root()]
    sizes = [1]
    for _ in range(7):
        level = [c for v in level for c in tree.children(v)]
        sizes.append(len(level))
    assert sizes == tree.level_counts(7)
    # every lazily generated node maps to a valid walk and back
    for v in level[::17]:
        w = tree.walk(v)
        assert len(w) == 7 and w.in_domain(domain)
        assert has_infinite_extension(w, domain)
        assert tree.find(w) is v


def test_pruned_half_plane_known_values():
    assert as_tree(CLOSED_HALF_PLANE, pruned=True).level_counts(6) == [1, 3, 7, 19, 49, 129, 335]
    assert as_tree(FULL_PLANE).level_counts(4) == [1, 4, 12, 36, 100]


def test_budget_reports_partial_counts():
    with pytest.raises(BudgetExceeded) as info:
        as_tree(FULL_PLANE).level_counts(12, budget=500)
    e = info.value
    assert 0 <= e.depth < 12
    assert e.partial == oracles.naive_saw_counts(e.depth)


def test_head_map_and_infinite_descent():
    tree = as_tree(FULL_PLANE)
    node = tree.node_at((1, 0))  # N then E
    assert tree.head(node) == (1, 1)
    assert tree.infinite_descent(node) is True
    assert as_tree(FULL_PLANE, pruned=True).infinite_descent(node) is True


moves = st.lists(st.sampled_from("ENWS"), min_size=1, max_size=24)


def _walk_from(ms, domain):
    pts = [(0, 0)]
    for m in ms:
        d = {"E": (1, 0), "N": (0, 1), "W": (-1, 0), "S": (0, -1)}[m]
        q = (pts[-1][0] + d[0], pts[-1][1] + d[1])
        if q in pts or not domain.contains(q):
            continue
        pts.append(q)
    return pts


@settings(max_examples=300, deadline=None)
@given(ms=moves, domain=st.sampled_from(DOMAINS))
def test_escape_criteria_agree(ms, domain):
    pts = _walk_from(ms, domain)
    w = FiniteWalk(tuple(pts))
    expected = oracles.extends_infinitely(pts, domain.contains)
    assert has_infinite_extension(w, domain) == expected
    occ = Occupancy(domain, pts)
    assert escapes(occ, pts[-1], domain) == expected
