"""Exact counts of self-avoiding walks, bridges and irreducible bridges.

Bridges follow the x-coordinate convention: an n-step walk is a bridge when
``x_0 < x_i <= x_n`` for every ``i >= 1``, so every bridge starts with an
East step.  ``b_0 = 1`` by convention.

Counts are exact Python integers from depth-first backtracking.  Plane
enumerations use the reflection symmetries of the domain: while a walk is
still on a symmetry axis only one of the two mirror branches is explored and
its count is doubled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import BudgetExceeded, InvalidInput
from .lattice import FULL_PLANE, DomainSpec, LatticePoint
from .numerics import bisect_increasing
from .rng import as_stream
from .saw_tree import FiniteWalk
from .trees import DEFAULT_NODE_BUDGET

#: irreducible bridges are stored explicitly up to this length
KESTEN_MAX_LENGTH = 12
#: second-vertex selectors for irreducible bridges (the first step is E)
SELECTORS = ("E", "N", "S")


@dataclass(frozen=True)
class CountTable:
    """Exact counts indexed by length, ``counts[n]`` for n = 0..n_max."""

    kind: str
    domain: str
    counts: tuple
    complete: bool = True

    def __getitem__(self, n):
        return self.counts[n]

    def __len__(self):
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    @property
    def n_max(self) -> int:
        return len(self.counts) - 1

    def rows(self):
        return list(enumerate(self.counts))


def _budgeted(run, n_max, budget, kind, domain):
    """Run ``run(n, budget)`` at n_max, backing off to the deepest feasible n."""
    if n_max < 0:
        raise InvalidInput("n_max must be non-negative")
    budget = DEFAULT_NODE_BUDGET if budget is None else budget
    for n in range(n_max, -1, -1):
        try:
            counts = run(n, budget)
        except _Budget:
            continue
        table = CountTable(kind, domain, tuple(counts), n == n_max)
        if n < n_max:
            raise BudgetExceeded(
                f"{kind} counts beyond n = {n} exceed budget of {budget} nodes",
                depth=n,
                partial=table,
            )
        return table
    raise BudgetExceeded("budget too small for any length", depth=-1,
                         partial=CountTable(kind, domain, (), False))


class _Budget(Exception):
    pass


def _symmetries(domain: DomainSpec):
    """(mirror x -> -x allowed, mirror y -> -y allowed) for the domain."""
    return domain.kind != "quadrant", domain.kind == "plane"


def _walk_counts(domain: DomainSpec, n_max: int, budget: int):
    counts = [0] * (n_max + 1)
    counts[0] = 1
    if n_max == 0:
        return counts
    contains = domain.contains
    mirror_x, mirror_y = _symmetries(domain)
    occ = {(0, 0)}
    work = [0]

    def rec(x, y, depth, weight, on_x_axis, on_y_axis):
        # on_y_axis: walk so far has x == 0 throughout (x-mirror still free)
        work[0] += 1
        if work[0] > budget:
            raise _Budget
        for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            w = weight
            ox, oy = on_x_axis, on_y_axis
            if dx:
                if on_y_axis and mirror_x:
                    if dx < 0:
                        continue
                    w *= 2
                oy = False
            else:
                if on_x_axis and mirror_y:
                    if dy < 0:
                        continue
                    w *= 2
                ox = False
            q = (x + dx, y + dy)
            if q in occ or not contains(q):
                continue
            counts[depth + 1] += w
            if depth + 1 < n_max:
                occ.add(q)
                rec(q[0], q[1], depth + 1, w, ox, oy)
                occ.discard(q)

    rec(0, 0, 0, 1, True, True)
    return counts


def count_walks(domain: DomainSpec = FULL_PLANE, n_max: int = 10, budget=None) -> CountTable:
    """c_0..c_{n_max}: self-avoiding walks of each length from the origin."""
    return _budgeted(lambda n, b: _walk_counts(domain, n, b), n_max, budget, "saw", str(domain))


def is_bridge(w) -> bool:
    """x_0 < x_i <= x_n for every i >= 1."""
    pts = w.points if isinstance(w, FiniteWalk) else tuple(w)
    if len(pts) < 2:
        raise InvalidInput("a bridge needs at least one step")
    x0, xn = pts[0][0], pts[-1][0]
    return all(x0 < p[0] <= xn for p in pts[1:])


def _bridge_dfs(domain, n_max, budget, on_bridge=None, use_mirror=True):
    """Visit every bridge of length 1..n_max in ``domain`` (plus its prefixes).

    Walks are restricted to x >= 1 after the forced first East step, which
    is exactly the prefix-closed set of walks that can still become bridges.
    ``on_bridge(xs, ys, weight)`` is called for each bridge.
    """
    counts = [0] * (n_max + 1)
    counts[0] = 1
    if n_max == 0:
        return counts
    contains = domain.contains
    if not contains((1, 0)):
        return counts
    mirror_y = use_mirror and domain.kind == "plane"
    xs, ys = [0, 1], [0, 0]
    occ = {(0, 0), (1, 0)}
    work = [0]

    def visit(weight):
        if on_bridge is not None:
            on_bridge(xs, ys, weight)

    counts[1] = 1
    visit(1)

    def rec(x, y, xmax, depth, weight, on_axis):
        work[0] += 1
        if work[0] > budget:
            raise _Budget
        for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            w = weight
            ax = on_axis
            if dy:
                if on_axis and mirror_y:
                    if dy < 0:
                        continue
                    w *= 2
                ax = False
            nx, ny = x + dx, y + dy
            if nx <= 0:
                continue
            q = (nx, ny)
            if q in occ or not contains(q):
                continue
            nmax = nx if nx > xmax else xmax
            occ.add(q)
            xs.append(nx)
            ys.append(ny)
            if nx == nmax:
                counts[depth + 1] += w
                visit(w)
            if depth + 1 < n_max:
                rec(nx, ny, nmax, depth + 1, w, ax)
            occ.discard(q)
            xs.pop()
            ys.pop()

    if n_max > 1:
        rec(1, 0, 1, 1, 1, True)
    return counts


def count_bridges(domain: DomainSpec = FULL_PLANE, n_max: int = 10, budget=None) -> CountTable:
    """b_n for the plane, or bridge counts of walks confined to ``domain``.

    ``strip:<l>`` gives the strip bridge counts p^(l)_n and ``quadrant``
    the quadrant bridge counts.
    """
    kind = "strip-bridge" if domain.kind == "strip" else "bridge"
    return _budgeted(lambda n, b: _bridge_dfs(domain, n, b), n_max, budget, kind, str(domain))


def split_points(xs) -> list[int]:
    """Indices i (0 < i < n) where a bridge with x-sequence ``xs`` splits
    into two bridges: max(xs[:i+1]) < min(xs[i+1:])."""
    n = len(xs) - 1
    sufmin = [0] * (n + 2)
    sufmin[n + 1] = math.inf
    for j in range(n, -1, -1):
        sufmin[j] = min(xs[j], sufmin[j + 1])
    out = []
    pmax = xs[0]
    for i in range(1, n):
        if xs[i] > pmax:
            pmax = xs[i]
        if pmax < sufmin[i + 1]:
            out.append(i)
    return out


def concat(*walks) -> FiniteWalk:
    """Concatenate walks end to start (each later walk translated)."""
    if not walks:
        raise InvalidInput("nothing to concatenate")
    pts = list(walks[0].points)
    for w in walks[1:]:
        end = pts[-1]
        o = w.points[0]
        pts.extend(LatticePoint(end[0] + p[0] - o[0], end[1] + p[1] - o[1]) for p in w.points[1:])
    return FiniteWalk(tuple(pts))


@dataclass(frozen=True)
class BridgeDecomposition:
    pieces: tuple

    def concat(self) -> FiniteWalk:
        return concat(*self.pieces)

    def __len__(self):
        return len(self.pieces)


def _translate(pts):
    x0, y0 = pts[0]
    return FiniteWalk(tuple(LatticePoint(x - x0, y - y0) for x, y in pts))


def decompose(bridge: FiniteWalk) -> BridgeDecomposition:
    """Unique factorization of a bridge into irreducible bridges."""
    if len(bridge) < 1 or not is_bridge(bridge):
        raise InvalidInput("input is not a bridge")
    pts = bridge.points
    cuts = [0] + split_points([p[0] for p in pts]) + [len(pts) - 1]
    return BridgeDecomposition(
        tuple(_translate(pts[a : b + 1]) for a, b in zip(cuts, cuts[1:]))
    )


def is_irreducible(bridge: FiniteWalk) -> bool:
    return is_bridge(bridge) and not split_points([p[0] for p in bridge.points])


@dataclass
class IrreducibleTable:
    n_max: int
    counts: list  # p_n
    by_selector: dict  # selector -> [p_{i,n}]
    walks: dict | None = None  # n -> list of move strings


_MOVE = {(1, 0): "E", (0, 1): "N", (-1, 0): "W", (0, -1): "S"}


def _irreducible_run(n_max, budget, store):
    counts = [0] * (n_max + 1)
    by_sel = {s: [0] * (n_max + 1) for s in SELECTORS}
    walks = {n: [] for n in range(1, n_max + 1)} if store else None

    def on_bridge(xs, ys, weight):
        n = len(xs) - 1
        if split_points(xs):
            return
        counts[n] += weight
        if n == 1:
            by_sel["E"][1] += 1
        else:
            sel = _MOVE[(xs[2] - xs[1], ys[2] - ys[1])]
            if weight == 2:
                # mirrored pair: this walk plus its reflection in y
                mirror = {"E": "E", "N": "S", "S": "N"}[sel]
                by_sel[sel][n] += 1
                by_sel[mirror][n] += 1
            else:
                by_sel[sel][n] += 1
        if store:
            mv = "".join(_MOVE[(xs[i + 1] - xs[i], ys[i + 1] - ys[i])] for i in range(n))
            walks[n].append(mv)
            if weight == 2:
                walks[n].append(mv.translate(str.maketrans("NS", "SN")))

    _bridge_dfs(FULL_PLANE, n_max, budget, on_bridge)
    return IrreducibleTable(n_max, counts, by_sel, walks)


@lru_cache(maxsize=None)
def _irreducible_cached(n_max: int, store: bool) -> IrreducibleTable:
    return _irreducible_run(n_max, DEFAULT_NODE_BUDGET * 4, store)


def irreducible_table(n_max: int, store: bool = False, budget=None) -> IrreducibleTable:
    if n_max < 1:
        raise InvalidInput("n_max must be at least 1")
    if budget is not None:
        try:
            return _irreducible_run(n_max, budget, store)
        except _Budget:
            raise BudgetExceeded(f"irreducible bridges up to {n_max} exceed budget",
                                 depth=None) from None
    try:
        return _irreducible_cached(n_max, store)
    except _Budget:
        raise BudgetExceeded(f"irreducible bridges up to {n_max} exceed budget",
                             depth=None) from None


def count_irreducible(n_max: int, budget=None) -> CountTable:
    """p_n: irreducible bridges of length n (p_0 = 0)."""
    t = irreducible_table(n_max, budget=budget)
    return CountTable("irreducible", "plane", tuple(t.counts))


def _selector(i) -> str:
    if isinstance(i, int):
        if not 0 <= i < len(SELECTORS):
            raise InvalidInput("selector index must be 0, 1 or 2")
        return SELECTORS[i]
    s = str(i).upper()
    if s not in SELECTORS:
        raise InvalidInput(f"selector must be one of {SELECTORS}")
    return s


def irreducible_through(i, n_max: int, budget=None) -> CountTable:
    """p_{i,n}: irreducible bridges whose second step is ``i`` (E, N or S).

    The one-step bridge E is counted under E, so the three tables add up
    to p_n at every length.
    """
    s = _selector(i)
    t = irreducible_table(n_max, budget=budget)
    return CountTable(f"bridge-through-{s}", "plane", tuple(t.by_selector[s]))


# --- connective constant and truncated Kesten identity ---------------------


def _nth_root(c: int, n: int) -> float:
    return math.exp(math.log(c) / n)


def mu_bracket(n: int, budget=None) -> tuple[float, float]:
    """[max_{m<=n} b_m^(1/m), min_{m<=n} c_m^(1/m)]."""
    if n < 1:
        raise InvalidInput("n must be at least 1")
    b = count_bridges(FULL_PLANE, n, budget)
    c = count_walks(FULL_PLANE, n, budget)
    lo = max(_nth_root(b[m], m) for m in range(1, n + 1))
    hi = min(_nth_root(c[m], m) for m in range(1, n + 1))
    return lo, hi


def kesten_partial_sum(x, N: int):
    """sum_{n=1}^{N} p_n x^n (exact for rational x)."""
    if N < 1:
        return 0
    p = irreducible_table(N).counts
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return sum((p[n] * x**n for n in range(1, N + 1)), Fraction(0))
    x = float(x)
    return math.fsum(p[n] * x**n for n in range(1, N + 1))


def critical_lambda_m(m: int, tol: float = 1e-12) -> float:
    """Positive root of sum_{n<=m} p_n x^n = 1."""
    if m < 1:
        raise InvalidInput("m must be at least 1")
    p = irreducible_table(m).counts
    return bisect_increasing(
        lambda x: math.fsum(p[n] * x**n for n in range(1, m + 1)), 1.0, 1e-9, 1.0, tol
    )


def phi_critical_m(m: int, i) -> float:
    """sum_{n<=m} p_{i,n} lambda_m^n for second step ``i``."""
    s = _selector(i)
    lam = critical_lambda_m(m)
    row = irreducible_table(m).by_selector[s]
    return math.fsum(row[n] * lam**n for n in range(1, m + 1))


def phi_critical_vector(m: int) -> dict:
    return {s: phi_critical_m(m, s) for s in SELECTORS}


# --- Kesten measure ----------------------------------------------------------


@dataclass(frozen=True)
class KestenConfig:
    """Length law ``p_n beta^n / Z`` of irreducible bridges, n <= m_max."""

    beta: float
    m_max: int
    Z: float
    weights: tuple  # weights[n] for n = 0..m_max (weights[0] = 0)
    walks: dict = field(repr=False, compare=False, default=None)


def kesten_config(beta, m_max: int) -> KestenConfig:
    if not 0 < float(beta):
        raise InvalidInput("beta must be positive")
    if not 1 <= m_max <= KESTEN_MAX_LENGTH:
        raise InvalidInput(
            f"m_max must be in 1..{KESTEN_MAX_LENGTH} (irreducible bridges are stored explicitly)"
        )
    t = irreducible_table(m_max, store=True)
    beta = float(beta)
    raw = [0.0] + [t.counts[n] * beta**n for n in range(1, m_max + 1)]
    Z = math.fsum(raw)
    if Z <= 0:
        raise InvalidInput("empty support")
    return KestenConfig(beta, m_max, Z, tuple(r / Z for r in raw), t.walks)


def _length_sampler(config: KestenConfig, u):
    support = [n for n, w in enumerate(config.weights) if w > 0]
    cum = []
    acc = 0.0
    for n in support:
        acc += config.weights[n]
        cum.append(acc)

    def draw():
        x = u() * acc
        for n, c in zip(support, cum):
            if x < c:
                return n
        return support[-1]

    return draw


def kesten_sample(config: KestenConfig, k_blocks: int, rng=0) -> FiniteWalk:
    """Concatenation of ``k_blocks`` independent irreducible bridges.

    Each block: draw a length n with probability ``weights[n]``, then a
    uniform irreducible bridge of that length.
    """
    return FiniteWalk.from_moves("".join(kesten_blocks(config, k_blocks, rng)))


def kesten_blocks(config: KestenConfig, k_blocks: int, rng=0) -> list[str]:
    """The move strings of the blocks drawn by :func:`kesten_sample`."""
    if k_blocks < 0:
        raise InvalidInput("k_blocks must be non-negative")
    u = as_stream(rng, "kesten")
    draw = _length_sampler(config, u)
    out = []
    for _ in range(k_blocks):
        pool = config.walks[draw()]
        out.append(pool[int(u() * len(pool))])
    return out
