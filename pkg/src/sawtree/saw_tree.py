"""Self-avoiding walks and the self-avoiding tree of a planar domain.

The vertices of the tree are finite self-avoiding walks from the origin and
the children of a walk are its one-step extensions, in E, N, W, S order.
The pruned tree keeps only walks that extend to an infinite self-avoiding
walk inside the domain.

A :class:`SawTree` never materializes walks as point lists.  Each node
stores its endpoint and the bounding box of its walk; the tree keeps a
single occupancy set synchronized with the most recently expanded node and
moves it along the tree path when a different node is expanded.  For a
random walk on the tree consecutive expansions are neighbours, so the sync
costs O(1) amortized.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, insort
from dataclasses import dataclass

from .errors import BudgetExceeded, InvalidInput
from .lattice import DIRECTIONS, ORIGIN, STEP_NAME, STEPS, DomainSpec, LatticePoint
from .trees import DEFAULT_NODE_BUDGET, Node, TreeModel

ESCAPE_MARGIN = 2


@dataclass(frozen=True)
class FiniteWalk:
    """A self-avoiding lattice path starting at the origin."""

    points: tuple

    def __post_init__(self):
        pts = tuple(LatticePoint(*p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts or pts[0] != ORIGIN:
            raise InvalidInput("walks start at the origin")
        seen = {pts[0]}
        for a, b in zip(pts, pts[1:]):
            if abs(a.x - b.x) + abs(a.y - b.y) != 1:
                raise InvalidInput(f"{a} -> {b} is not a lattice step")
            if b in seen:
                raise InvalidInput(f"walk revisits {b}")
            seen.add(b)

    @classmethod
    def from_moves(cls, moves: str) -> "FiniteWalk":
        pts = [ORIGIN]
        for m in moves:
            try:
                pts.append(pts[-1] + DIRECTIONS[m.upper()])
            except KeyError:
                raise InvalidInput(f"unknown move {m!r}") from None
        return cls(tuple(pts))

    def __len__(self):
        return len(self.points) - 1

    @property
    def endpoint(self) -> LatticePoint:
        return self.points[-1]

    def moves(self) -> str:
        return "".join(STEP_NAME[b - a] for a, b in zip(self.points, self.points[1:]))

    def prefix(self, n: int) -> "FiniteWalk":
        return FiniteWalk(self.points[: n + 1])

    def extend(self, p) -> "FiniteWalk":
        return FiniteWalk(self.points + (LatticePoint(*p),))

    def in_domain(self, domain: DomainSpec) -> bool:
        return all(domain.contains(p) for p in self.points)


def _bbox_of(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (min(xs), max(xs), min(ys), max(ys))


def _escape_sides(domain: DomainSpec, box):
    """Sides of the enlarged box whose far side meets the domain (search hint)."""
    x0, x1, y0, y1 = box
    return (
        domain.contains((x0, 1)),
        True,
        domain.contains((1, y0)),
        domain.contains((1, y1)),
    )


def can_escape(occupied, start, box, domain: DomainSpec, margin: int = ESCAPE_MARGIN):
    """True iff some free in-domain vertex outside ``box`` enlarged by
    ``margin`` is reachable from ``start`` through free in-domain vertices.

    ``start`` itself is treated as occupied.  Search is best-first towards
    the nearest escapable side, so open walks are decided in a handful of
    steps and only genuinely enclosed pockets are explored exhaustively.
    """
    x0, x1, y0, y1 = box
    x0 -= margin
    x1 += margin
    y0 -= margin
    y1 += margin
    left, right, down, up = _escape_sides(domain, (x0, x1, y0, y1))
    contains = domain.contains

    def dist(x, y):
        d = x1 - x + 1  # right is always open
        if left:
            d = min(d, x - x0 + 1)
        if up:
            d = min(d, y1 - y + 1)
        if down:
            d = min(d, y - y0 + 1)
        return d

    sx, sy = start
    seen = {(sx, sy)}
    heap = []
    for dx, dy in STEPS:
        q = (sx + dx, sy + dy)
        if q not in occupied and q not in seen and contains(q):
            seen.add(q)
            heapq.heappush(heap, (dist(*q), q))
    while heap:
        _, (x, y) = heapq.heappop(heap)
        if x < x0 or x > x1 or y < y0 or y > y1:
            return True
        for dx, dy in STEPS:
            q = (x + dx, y + dy)
            if q not in seen and q not in occupied and contains(q):
                seen.add(q)
                heapq.heappush(heap, (dist(*q), q))
    return False


class Occupancy:
    """Set of occupied sites with sorted per-row and per-column extremes.

    A free site is *visible* when the straight ray from it in some
    direction stays in the domain and meets no occupied site; such a site
    starts an infinite self-avoiding continuation.
    """

    __slots__ = ("sites", "rows", "cols", "up", "down", "left")

    def __init__(self, domain: DomainSpec, points=()):
        self.sites = set()
        self.rows = {}
        self.cols = {}
        kind = domain.kind
        # rays to the right stay in every supported domain
        self.up = kind != "strip"
        self.down = kind == "plane"
        self.left = kind != "quadrant"
        for p in points:
            self.add(p)

    def __contains__(self, p):
        return p in self.sites

    def add(self, p):
        x, y = p
        self.sites.add((x, y))
        insort(self.rows.setdefault(y, []), x)
        insort(self.cols.setdefault(x, []), y)

    def discard(self, p):
        x, y = p
        self.sites.discard((x, y))
        row = self.rows[y]
        del row[bisect_left(row, x)]
        col = self.cols[x]
        del col[bisect_left(col, y)]

    def visible(self, x, y) -> bool:
        row = self.rows.get(y)
        if not row or x > row[-1] or (self.left and x < row[0]):
            return True
        col = self.cols.get(x)
        if not col:
            return self.up or self.down
        return (self.up and y > col[-1]) or (self.down and y < col[0])


def escapes(occ: Occupancy, start, domain: DomainSpec) -> bool:
    """True iff a free in-domain site reachable from ``start`` (through free
    sites, ``start`` itself counted occupied) is visible.

    Every site outside the walk's bounding box is visible, so this decides
    the same question as :func:`can_escape`, usually after one probe.
    """
    sites = occ.sites
    contains = domain.contains
    sx, sy = start
    seen = {(sx, sy)}
    stack = [(sx, sy)]
    while stack:
        x, y = stack.pop()
        for dx, dy in STEPS:
            q = (x + dx, y + dy)
            if q in seen or q in sites or not contains(q):
                continue
            if occ.visible(*q):
                return True
            seen.add(q)
            stack.append(q)
    return False


def extensions(w: FiniteWalk, domain: DomainSpec) -> list[FiniteWalk]:
    """All one-step self-avoiding in-domain extensions, in E, N, W, S order."""
    if not w.in_domain(domain):
        raise InvalidInput("walk leaves the domain")
    occ = set(w.points)
    end = w.endpoint
    out = []
    for step in STEPS:
        q = end + step
        if q not in occ and domain.contains(q):
            out.append(w.extend(q))
    return out


def has_infinite_extension(w: FiniteWalk, domain: DomainSpec, margin: int = ESCAPE_MARGIN) -> bool:
    """Whether ``w`` is a prefix of an infinite self-avoiding walk in ``domain``."""
    if not w.in_domain(domain):
        raise InvalidInput("walk leaves the domain")
    return can_escape(set(w.points), w.endpoint, _bbox_of(w.points), domain, margin)


class SawTree(TreeModel):
    """The self-avoiding tree of ``domain``; ``pruned`` drops finite branches.

    Node state is ``(endpoint, bbox)``.  Use :meth:`walk` to recover the
    full :class:`FiniteWalk` of a node and :meth:`find` for the reverse.
    """

    def __init__(self, domain: DomainSpec, pruned: bool = False):
        super().__init__()
        self.domain = domain
        self.pruned = pruned
        self.leafless = pruned
        self._occ = Occupancy(domain, [ORIGIN])
        self._cur = None  # node whose walk _occ currently holds

    def __repr__(self):
        return f"SawTree({self.domain}, pruned={self.pruned})"

    def root_state(self):
        return (ORIGIN, (0, 0, 0, 0))

    def head(self, node):
        return node.state[0]

    def _sync(self, node):
        cur = self._cur
        if cur is None:
            cur = self._cur = self.root()
        if cur is node:
            return
        occ = self._occ
        a, b = cur, node
        add = []
        while a.depth > b.depth:
            occ.discard(a.state[0])
            a = a.parent
        while b.depth > a.depth:
            add.append(b.state[0])
            b = b.parent
        while a is not b:
            occ.discard(a.state[0])
            add.append(b.state[0])
            a = a.parent
            b = b.parent
        for p in add:
            occ.add(p)
        self._cur = node

    def child_states(self, node):
        self._sync(node)
        occ = self._occ
        domain = self.domain
        p, box = node.state
        x0, x1, y0, y1 = box
        out = []
        for dx, dy in STEPS:
            q = LatticePoint(p.x + dx, p.y + dy)
            if q in occ.sites or not domain.contains(q):
                continue
            nbox = (min(x0, q.x), max(x1, q.x), min(y0, q.y), max(y1, q.y))
            if self.pruned and x0 <= q.x <= x1 and y0 <= q.y <= y1:
                # q inside the old box; otherwise it trivially escapes
                occ.add(q)
                ok = escapes(occ, q, domain)
                occ.discard(q)
                if not ok:
                    continue
            out.append((q, nbox))
        return out

    def infinite_descent(self, node):
        if self.pruned:
            return True
        with self._lock:
            self._sync(node)
            return escapes(self._occ, node.state[0], self.domain)

    def walk(self, node) -> FiniteWalk:
        pts = [n.state[0] for n in node.ancestors()]
        return FiniteWalk(tuple(reversed(pts)))

    def find(self, w: FiniteWalk):
        """The node whose walk is ``w``, or None if it is not in the tree."""
        node = self.root()
        for q in w.points[1:]:
            for c in self.children(node):
                if c.state[0] == q:
                    node = c
                    break
            else:
                return None
        return node

    def level_counts(self, n_max, budget=None):
        """Exact level sizes by direct backtracking (no node objects)."""
        budget = DEFAULT_NODE_BUDGET if budget is None else budget
        for depth in range(n_max, -1, -1):
            try:
                counts = _count_tree_levels(self.domain, self.pruned, depth, budget)
            except _Budget:
                continue
            if depth < n_max:
                raise BudgetExceeded(
                    f"level counts beyond depth {depth} exceed budget of {budget}",
                    depth=depth,
                    partial=counts,
                )
            return counts
        raise BudgetExceeded("budget too small for any level", depth=-1, partial=[])


class _Budget(Exception):
    pass


def _count_tree_levels(domain, pruned, n_max, budget):
    counts = [0] * (n_max + 1)
    counts[0] = 1
    occ = Occupancy(domain, [ORIGIN])
    contains = domain.contains
    work = [0]

    def rec(p, box, depth):
        if depth == n_max:
            return
        work[0] += 1
        if work[0] > budget:
            raise _Budget
        x0, x1, y0, y1 = box
        for dx, dy in STEPS:
            q = (p[0] + dx, p[1] + dy)
            if q in occ.sites or not contains(q):
                continue
            nbox = (min(x0, q[0]), max(x1, q[0]), min(y0, q[1]), max(y1, q[1]))
            occ.add(q)
            if pruned and x0 <= q[0] <= x1 and y0 <= q[1] <= y1:
                if not escapes(occ, q, domain):
                    occ.discard(q)
                    continue
            counts[depth + 1] += 1
            rec(q, nbox, depth + 1)
            occ.discard(q)

    rec(ORIGIN, (0, 0, 0, 0), 0)
    return counts


def as_tree(domain: DomainSpec, pruned: bool = False) -> SawTree:
    return SawTree(domain, pruned)


def walk_of(tree: SawTree, node: Node) -> FiniteWalk:
    return tree.walk(node)

