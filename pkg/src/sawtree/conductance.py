"""Effective conductance of biased-walk networks on rooted trees.

The network puts conductance ``lam**d`` on the edge entering a depth-d
vertex.  Reductions work with *scaled* resistances: for a vertex v at depth
d, ``r(v) = lam**d * R(v)`` where R(v) is the resistance from v down to the
truncation level.  The parallel/series rule then becomes

    r(v) = 1 / (lam * sum_c 1 / (1 + r(c)))

with no powers of lam, so deep truncations neither overflow nor lose
precision, and subtrees with equal keys share one memo entry.  The
conductance seen from the root is ``1 / r(root)``.

Infinite resistance (a branch with no vertex at the truncation level) is
represented by ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetExceeded, InvalidInput
from .rng import UniformStream
from .trees import DEFAULT_NODE_BUDGET, TreeModel, as_fraction

#: exact rational arithmetic is used while a reduction touches at most this
#: many distinct subtree classes
EXACT_CLASS_LIMIT = 100_000
#: Fraction sizes grow with depth; past this level floats are used instead
EXACT_DEPTH_LIMIT = 400
#: ...and once a value needs more bits than this (branching keys compound)
EXACT_BITS_LIMIT = 20_000
MC_CHUNK = 10_000


class _TooBig(Exception):
    pass


def _ray_tail(tree: TreeModel, node, lam):
    return TreeModel.tail_bound(tree, node, lam)


def reduce_scaled(tree, lam, node, levels, tail=None, exact=True, budget=None):
    """Scaled resistance from ``node`` to the level ``levels`` below it.

    ``tail(node)`` gives the scaled resistance hung below each node at the
    bottom level (``None`` means open circuit); without it the bottom level
    is shorted together, which is the plain truncation.
    """
    if levels < 0:
        raise InvalidInput("levels must be non-negative")
    if exact:
        one, zero = Fraction(1), Fraction(0)
        total = sum
    else:
        one, zero = 1.0, 0.0
        total = math.fsum
    limit = EXACT_CLASS_LIMIT if exact else (budget or DEFAULT_NODE_BUDGET)
    memo: dict = {}
    work = 0

    def bottom(v):
        if tail is None:
            return zero
        return tail(v)

    # post-order: frames are [node, remaining, child iterator, terms, key]
    stack = [[node, levels, None, None, tree.key(node)]]
    result = None
    while stack:
        frame = stack[-1]
        v, rem, it, terms, k = frame
        if it is None:
            hit = (k, rem) in memo if k is not None else False
            if hit or rem == 0:
                stack.pop()
                result = memo[(k, rem)] if hit else bottom(v)
                if rem == 0 and k is not None:
                    memo[(k, 0)] = result
                if stack:
                    _push_term(stack[-1], result, one)
                continue
            work += 1
            if work > limit:
                if exact:
                    raise _TooBig
                raise BudgetExceeded(
                    f"reduction exceeded {limit} expansions", depth=None
                )
            frame[3] = []
            frame[2] = iter(tree.children(v))
            continue
        child = next(it, None)
        if child is not None:
            stack.append([child, rem - 1, None, None, tree.key(child)])
            continue
        stack.pop()
        s = total(terms) if terms else zero
        result = None if s == 0 else one / (lam * s)
        if exact and result is not None and result.denominator.bit_length() > EXACT_BITS_LIMIT:
            raise _TooBig
        if k is not None:
            memo[(k, rem)] = result
        if stack:
            _push_term(stack[-1], result, one)
    return result


def _push_term(frame, r, one):
    if r is not None:
        frame[3].append(one / (one + r))


def _prepare(lam, n, exact):
    if n < 1:
        raise InvalidInput("truncation level must be at least 1")
    if lam == math.inf:
        raise InvalidInput("conductance needs a finite bias")
    if exact is None:
        exact = n <= EXACT_DEPTH_LIMIT
    lam_x = as_fraction(lam) if exact else float(lam)
    if lam_x <= 0:
        raise InvalidInput("bias must be positive")
    return lam_x, exact


def _check_root(tree):
    if not tree.children(tree.root()):
        raise InvalidInput("degenerate tree: the root has no children")


def _run(tree, lam, n, exact, tail_factory):
    lam_x, exact = _prepare(lam, n, exact)
    if exact:
        try:
            tail = tail_factory(lam_x) if tail_factory else None
            return reduce_scaled(tree, lam_x, tree.root(), n, tail, True), True
        except _TooBig:
            lam_x = float(lam)
    tail = tail_factory(lam_x) if tail_factory else None
    r = reduce_scaled(tree, lam_x, tree.root(), n, tail, False)
    if r is not None and math.isinf(r):
        r = None
    return r, False


def _to_conductance(r):
    if r is None:
        return 0
    return 1 / r


def truncated_conductance(tree: TreeModel, lam, n: int, exact: bool | None = None):
    """Exact conductance between the root and level ``n``.

    Returns a Fraction when computed exactly, otherwise a float.  A tree
    with no vertex at level ``n`` gives 0 (see :func:`conductance_interval`
    for the flag).
    """
    _check_root(tree)
    r, is_exact = _run(tree, lam, n, exact, None)
    c = _to_conductance(r)
    return Fraction(c) if is_exact and c == 0 else c


def _float_tail(bound):
    def tail(v):
        b = bound(v)
        return None if b is None else float(b)

    return tail


def _tail_factory(tree, closed_form):
    def factory(lam):
        if closed_form:
            raw = lambda v: tree.tail_bound(v, lam)  # noqa: E731
        else:
            raw = lambda v: _ray_tail(tree, v, lam)  # noqa: E731
        return raw if isinstance(lam, Fraction) else _float_tail(raw)

    return factory


@dataclass(frozen=True)
class ConductanceInterval:
    """Certified bounds ``lower <= C(lam, T) <= upper``."""

    lower: object
    upper: object
    truncation_level: int
    method: frozenset = field(default_factory=frozenset)
    dead_end: bool = False  # no vertex at the truncation level
    exact: bool = True

    def contains(self, value, tol=0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def within(self, other: "ConductanceInterval", tol=0.0) -> bool:
        return other.lower - tol <= self.lower and self.upper <= other.upper + tol

    @property
    def width(self):
        return self.upper - self.lower

    def as_dict(self) -> dict:
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "truncation_level": self.truncation_level,
            "method": sorted(self.method),
            "dead_end": self.dead_end,
            "exact": self.exact,
        }


def conductance_interval(
    tree: TreeModel, lam, n: int, exact: bool | None = None, closed_form: bool = False
) -> ConductanceInterval:
    """Bounds on the conductance to infinity from a level-``n`` truncation.

    The upper side is the truncated conductance.  For ``lam > 1`` the lower
    side hangs a ray (scaled resistance ``1/(lam-1)``) under every level-n
    vertex with an infinite line of descent; that network is a subnetwork
    of the tree, so by Rayleigh its conductance is smaller.  For
    ``lam <= 1`` the lower side is 0 unless ``closed_form`` is set, which
    additionally uses the exact geometric tail bounds of spherically
    symmetric pieces (valid at any ``lam``).
    """
    _check_root(tree)
    r_up, is_exact = _run(tree, lam, n, exact, None)
    upper = _to_conductance(r_up)
    methods = {"truncated-exact"}
    lam_f = float(lam)
    if lam_f > 1 or closed_form:
        r_lo, lo_exact = _run(tree, lam, n, is_exact, _tail_factory(tree, closed_form))
        lower = _to_conductance(r_lo)
        if lam_f > 1:
            methods.add("ray-closure")
        if closed_form:
            methods.add("ss-closed-form")
        is_exact = is_exact and lo_exact
    else:
        lower = 0
    if is_exact:
        lower, upper = Fraction(lower), Fraction(upper)
    else:
        lower, upper = float(lower), float(upper)
        lower = min(lower, upper)  # rounding only
    return ConductanceInterval(
        lower, upper, n, frozenset(methods), dead_end=r_up is None, exact=is_exact
    )


def ss_resistance_partial(profile, lam, N: int) -> Fraction:
    """sum_{n=1}^{N} lam**-n / |T_n| exactly (lower bound on the resistance)."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise InvalidInput("bias must be positive")
    sizes = profile.sizes(N)
    return sum((Fraction(1) / (lam**n * sizes[n]) for n in range(1, N + 1)), Fraction(0))


def nash_williams_bound(levels, lam, N: int | None = None):
    """sum_{n=1}^{N} 1 / (lam**n |T_n|) over level cutsets.

    ``levels[n]`` is |T_n| (``levels[0]`` is ignored).  A level of size 0
    makes the bound infinite.
    """
    lam = as_fraction(lam)
    N = len(levels) - 1 if N is None else N
    if N > len(levels) - 1:
        raise InvalidInput("not enough levels for the requested N")
    acc = Fraction(0)
    for n in range(1, N + 1):
        if levels[n] == 0:
            return math.inf
        acc += 1 / (lam**n * levels[n])
    return acc


def root_weight(tree: TreeModel, lam) -> object:
    """pi(o): total conductance at the root, (number of children) * lam."""
    return len(tree.children(tree.root())) * lam


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    successes: int = 0

    def as_dict(self):
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }


def _one_escape(tree, lam, n, u):
    kids = tree.children(tree.root())
    node = kids[int(u() * len(kids))]
    if n == 1:
        return True
    children = tree.children
    while True:
        kids = children(node)
        k = len(kids)
        x = u() * (1 + k * lam)
        if x < 1:
            node = node.parent
            if node.depth == 0:
                return False
        else:
            node = kids[min(int((x - 1) / lam), k - 1)]
            if node.depth == n:
                return True


def escape_probability_mc(
    tree: TreeModel, lam, n: int, samples: int, seed: int = 0
) -> McEstimate:
    """Monte Carlo estimate of P(reach level n before returning to the root).

    Samples are processed in chunks of ``MC_CHUNK``; chunk j draws from the
    substream labelled ``escape/<j>``, so the estimate depends only on
    (tree, lam, n, samples, seed).
    """
    if samples < 1:
        raise InvalidInput("samples must be positive")
    if n < 1:
        raise InvalidInput("level must be at least 1")
    _check_root(tree)
    lam_f = float(lam)
    if not lam_f > 0 or math.isinf(lam_f):
        raise InvalidInput("bias must be positive and finite")
    hits = 0
    done = 0
    chunk = 0
    while done < samples:
        m = min(MC_CHUNK, samples - done)
        u = UniformStream(seed, f"escape/{chunk}")
        for _ in range(m):
            hits += _one_escape(tree, lam_f, n, u)
        done += m
        chunk += 1
    p = hits / samples
    if samples > 1:
        sd = math.sqrt(samples * p * (1 - p) / (samples - 1))
    else:
        sd = 0.0
    return McEstimate(p, sd / math.sqrt(samples), samples, seed, hits)


# --- first-step laws -------------------------------------------------------


@dataclass(frozen=True)
class PhiInterval:
    """Per-step intervals for the limit-walk law of a root-started path."""

    steps: tuple  # ((lo, hi), ...)
    lower: float
    upper: float
    truncation_level: int

    @property
    def width(self):
        return self.upper - self.lower


def branch_weight_bounds(tree, lam, node, n, exact=None, closed_form=True):
    """For each child c of ``node``: bounds on the scaled branch conductance
    ``1 / (1 + r(c))`` of the edge to c plus the subtree below it.

    The high side shorts level ``n`` (relative to ``node``); the low side
    hangs certified tail bounds there (zero without them).
    """
    if n < 1:
        raise InvalidInput("truncation level must be at least 1")
    if exact is None:
        exact = n <= EXACT_DEPTH_LIMIT
    lam_x = as_fraction(lam) if exact else float(lam)
    factory = _tail_factory(tree, closed_form)
    out = []
    try:
        tail = factory(lam_x)
        for c in tree.children(node):
            r_hi = reduce_scaled(tree, lam_x, c, n - 1, tail, exact)
            r_lo = reduce_scaled(tree, lam_x, c, n - 1, None, exact)
            out.append((_weight(r_hi), _weight(r_lo)))
    except _TooBig:
        return branch_weight_bounds(tree, lam, node, n, False, closed_form)
    return [(float(lo), float(hi)) for lo, hi in out]


def _weight(r):
    if r is None or (isinstance(r, float) and math.isinf(r)):
        return 0
    return 1 / (1 + r)


def child_law_intervals(tree, lam, node, n, exact=None, closed_form=True):
    """Interval for each child's probability of carrying the limit walk.

    Siblings with equal keys root isomorphic subtrees and so share one
    exact value; grouping them keeps the intervals tight (a b-ary tree
    gives exactly 1/b at any truncation).
    """
    bounds = branch_weight_bounds(tree, lam, node, n, exact, closed_form)
    kids = tree.children(node)
    groups: dict = {}
    labels = []
    for i, c in enumerate(kids):
        k = tree.key(c)
        label = ("k", k) if k is not None else ("i", i)
        labels.append(label)
        groups.setdefault(label, []).append(i)
    rep = {g: bounds[idx[0]] for g, idx in groups.items()}
    mult = {g: len(idx) for g, idx in groups.items()}
    out = []
    for i in range(len(kids)):
        g = labels[i]
        lo_c, hi_c = rep[g]
        others_hi = math.fsum(mult[h] * rep[h][1] for h in groups if h != g)
        others_lo = math.fsum(mult[h] * rep[h][0] for h in groups if h != g)
        d_lo = mult[g] * lo_c + others_hi
        d_hi = mult[g] * hi_c + others_lo
        lo = lo_c / d_lo if d_lo > 0 else 0.0
        hi = hi_c / d_hi if d_hi > 0 else 1.0
        out.append((min(lo, hi), min(hi, 1.0)))
    return out


def phi_first_k_interval(tree: TreeModel, lam, path, n: int, exact=None, closed_form=True):
    """Interval for the probability that the limit walk starts with ``path``.

    ``path`` is a sequence of child indices (or of nodes, each a child of
    the previous one).  Each step's interval is a branch-conductance ratio
    at the current vertex; the product interval multiplies the ends.
    """
    node = tree.root()
    steps = []
    for item in path:
        kids = tree.children(node)
        if hasattr(item, "parent"):
            if item.parent is not node:
                raise InvalidInput("path is not a root-started chain of children")
            idx = item.index
        else:
            idx = int(item)
        if not 0 <= idx < len(kids):
            raise InvalidInput(f"no child {idx} at depth {node.depth}")
        steps.append(child_law_intervals(tree, lam, node, n, exact, closed_form)[idx])
        node = kids[idx]
    lo = math.prod(s[0] for s in steps)
    hi = math.prod(s[1] for s in steps)
    return PhiInterval(tuple(steps), lo, hi, n)
