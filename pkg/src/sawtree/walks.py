"""Biased random walk on rooted trees and limit-walk sampling.

Off the root, a vertex with k children steps to its parent with probability
1/(1 + k lam) and to each child with probability lam/(1 + k lam).  From the
root every child has probability 1/k.  ``lam = math.inf`` always moves to a
uniformly chosen child and stops at a leaf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .conductance import child_law_intervals
from .errors import InvalidInput, RefinementExhausted
from .rng import as_stream
from .saw_tree import FiniteWalk
from .trees import Node, TreeModel, as_fraction

DEFAULT_COMMIT_MARGIN = 40


def transition_distribution(k_children: int, is_root: bool, lam):
    """Exact step probabilities ``[parent, child_1, ..., child_k]``.

    The root has no parent entry: the list is just the k child weights.
    """
    if k_children < 0:
        raise InvalidInput("k_children must be non-negative")
    if is_root:
        if k_children == 0:
            raise InvalidInput("degenerate tree: the root has no children")
        return [Fraction(1, k_children)] * k_children
    if lam == math.inf:
        if k_children == 0:
            return [Fraction(1)]
        return [Fraction(0)] + [Fraction(1, k_children)] * k_children
    lam = as_fraction(lam)
    if lam <= 0:
        raise InvalidInput("bias must be positive")
    z = 1 + k_children * lam
    return [1 / z] + [lam / z] * k_children


@dataclass
class WalkerTrace:
    """Depths (and lattice heads, for walk trees) after each step.

    Index 0 is the start at the root.  ``stuck`` marks an infinite-bias run
    that hit a leaf before ``max_steps``.
    """

    depths: list
    heads: list | None
    steps: int
    stuck: bool
    rng: dict
    nodes: list | None = None
    final: Node | None = field(default=None, repr=False)

    @property
    def max_depth(self) -> int:
        return max(self.depths)

    def prefix(self, steps: int) -> "WalkerTrace":
        steps = min(steps, self.steps)
        return WalkerTrace(
            self.depths[: steps + 1],
            None if self.heads is None else self.heads[: steps + 1],
            steps,
            self.stuck and steps == self.steps,
            self.rng,
            None if self.nodes is None else self.nodes[: steps + 1],
        )


def _bias(lam):
    lam = float(lam)
    if not lam > 0:
        raise InvalidInput("bias must be positive")
    return lam


def simulate(
    tree: TreeModel, lam, max_steps: int, rng, keep_nodes: bool = False
) -> WalkerTrace:
    """Run the walk for ``max_steps`` steps from the root."""
    if max_steps < 1:
        raise InvalidInput("max_steps must be positive")
    lam = _bias(lam)
    u = as_stream(rng, "walk")
    root = tree.root()
    if not tree.children(root):
        raise InvalidInput("degenerate tree: the root has no children")
    head = tree.head
    with_heads = head(root) is not None
    node = root
    depths = [0]
    heads = [head(root)] if with_heads else None
    nodes = [root] if keep_nodes else None
    children = tree.children
    stuck = False
    steps = 0
    inf = math.isinf(lam)
    for _ in range(max_steps):
        kids = children(node)
        k = len(kids)
        if node.parent is None:
            node = kids[int(u() * k)]
        elif inf:
            if k == 0:
                stuck = True
                break
            node = kids[int(u() * k)]
        else:
            x = u() * (1 + k * lam)
            if x < 1:
                node = node.parent
            else:
                node = kids[min(int((x - 1) / lam), k - 1)]
        steps += 1
        depths.append(node.depth)
        if with_heads:
            heads.append(head(node))
        if keep_nodes:
            nodes.append(node)
    return WalkerTrace(depths, heads, steps, stuck, u.metadata(), nodes, node)


def line_visit_count(w) -> int:
    """Number of steps i >= 1 whose head lies on the horizontal axis."""
    if isinstance(w, FiniteWalk):
        pts = w.points
    elif isinstance(w, WalkerTrace):
        if w.heads is None:
            raise InvalidInput("trace carries no lattice heads")
        pts = w.heads
    else:
        pts = [tuple(p) for p in w]
    return sum(1 for p in pts[1:] if p[1] == 0)


def line_visit_profile(trace: WalkerTrace, checkpoints) -> list[int]:
    """line_visit_count of the trace prefixes at each checkpoint."""
    out = []
    count = 0
    pos = 1
    for c in sorted(checkpoints):
        c = min(c, trace.steps)
        while pos <= c:
            count += trace.heads[pos][1] == 0
            pos += 1
        out.append(count)
    return out


@dataclass
class LimitWalkPrefix:
    """First k vertices of a limit walk, as child indices from the root."""

    path: tuple
    nodes: tuple = field(repr=False)
    commit_level_margin: int | None
    total_steps: int
    method: str
    widths: tuple = ()
    disagreements: int = 0
    walk: FiniteWalk | None = None

    @property
    def k(self) -> int:
        return len(self.path)


@dataclass
class Timeout:
    """The commit rule did not fire within ``max_steps``."""

    steps: int
    max_depth: int
    margin: int
    partial: tuple = ()


def _prefix(tree, node, k, **kw):
    anc = node.ancestor_at(k)
    nodes = tuple(reversed(list(anc.ancestors())))
    walk = None
    if tree.head(tree.root()) is not None:
        walk = FiniteWalk(tuple(tree.head(v) for v in nodes))
    return LimitWalkPrefix(anc.path(), nodes, walk=walk, **kw)


def limit_walk_commit(
    tree: TreeModel,
    lam,
    k: int,
    commit_margin: int = DEFAULT_COMMIT_MARGIN,
    max_steps: int = 10**6,
    rng=0,
    verify: bool = True,
):
    """Approximate the first k steps of the limit walk.

    The walk runs until it first reaches depth ``k + margin``; the depth-k
    ancestor of its position there is the candidate.  With ``verify`` the
    walk continues to depth ``k + 2 * margin``; if the depth-k ancestor
    changed in between, the margin doubles and the check repeats.
    Returns :class:`Timeout` when ``max_steps`` run out.
    """
    if k < 0 or commit_margin < 1:
        raise InvalidInput("need k >= 0 and a positive margin")
    lam = _bias(lam)
    u = as_stream(rng, "limit-commit")
    root = tree.root()
    if not tree.children(root):
        raise InvalidInput("degenerate tree: the root has no children")
    if k == 0:
        return _prefix(tree, root, 0, commit_level_margin=commit_margin,
                       total_steps=0, method="commit-heuristic")
    children = tree.children
    inf = math.isinf(lam)
    margin = commit_margin
    target = k + margin
    candidate = None
    disagreements = 0
    node = root
    max_depth = 0
    for step in range(1, max_steps + 1):
        kids = children(node)
        n_k = len(kids)
        if node.parent is None:
            node = kids[int(u() * n_k)]
        elif inf:
            if n_k == 0:
                break
            node = kids[int(u() * n_k)]
        else:
            x = u() * (1 + n_k * lam)
            node = node.parent if x < 1 else kids[min(int((x - 1) / lam), n_k - 1)]
        d = node.depth
        if d > max_depth:
            max_depth = d
        if d < target:
            continue
        anc = node.ancestor_at(k)
        if not verify:
            return _prefix(tree, anc, k, commit_level_margin=margin,
                           total_steps=step, method="commit-heuristic")
        if candidate is None:
            candidate = anc
            target = k + 2 * margin
        elif anc is candidate:
            return _prefix(tree, anc, k, commit_level_margin=margin,
                           total_steps=step, method="commit-heuristic",
                           disagreements=disagreements)
        else:
            disagreements += 1
            margin *= 2
            candidate = anc
            target = k + 2 * margin
    partial = candidate.path() if candidate is not None else ()
    return Timeout(max_steps, max_depth, margin, partial)


DEFAULT_SCHEDULE = (8, 16, 32, 64, 128, 256, 512)


class ExactLimitSampler:
    """Sequential sampler for the limit-walk law with certified intervals.

    At each vertex the child-law intervals are refined along ``n_schedule``
    until all are narrower than ``tol``; the step is then drawn from the
    renormalized midpoints.  Intervals are cached per vertex.
    """

    def __init__(self, tree: TreeModel, lam, tol: float = 1e-3,
                 n_schedule=DEFAULT_SCHEDULE, closed_form: bool = True):
        if tol <= 0:
            raise InvalidInput("tol must be positive")
        self.tree = tree
        self.lam = lam
        self.tol = tol
        self.n_schedule = tuple(sorted(n_schedule))
        if not self.n_schedule:
            raise InvalidInput("empty truncation schedule")
        self.closed_form = closed_form
        self._cache: dict = {}

    def law(self, node: Node):
        """(probabilities, widths, truncation level) at ``node``."""
        hit = self._cache.get(node)
        if hit is not None:
            return hit
        kids = self.tree.children(node)
        if not kids:
            raise RefinementExhausted(f"vertex at depth {node.depth} is a leaf")
        if len(kids) == 1:
            res = ([1.0], [0.0], 0)
        else:
            res = None
            best = math.inf
            for n in self.n_schedule:
                iv = child_law_intervals(self.tree, self.lam, node, n,
                                         closed_form=self.closed_form)
                widths = [hi - lo for lo, hi in iv]
                best = max(widths)
                if best < self.tol:
                    mids = [(lo + hi) / 2 for lo, hi in iv]
                    z = math.fsum(mids)
                    if z <= 0:
                        break
                    res = ([m / z for m in mids], widths, n)
                    break
            if res is None:
                raise RefinementExhausted(
                    f"interval width {best:.3g} above tol {self.tol} at depth "
                    f"{node.depth} after n = {self.n_schedule[-1]}"
                )
        self._cache[node] = res
        return res

    def sample(self, k: int, rng) -> LimitWalkPrefix:
        u = as_stream(rng, "limit-exact")
        node = self.tree.root()
        widths = []
        for _ in range(k):
            probs, w, _n = self.law(node)
            x = u()
            acc = 0.0
            idx = len(probs) - 1
            for i, p in enumerate(probs):
                acc += p
                if x < acc:
                    idx = i
                    break
            widths.append(max(w))
            node = self.tree.children(node)[idx]
        return _prefix(self.tree, node, k, commit_level_margin=None,
                       total_steps=k, method="exact-sequential", widths=tuple(widths))


def limit_walk_exact(tree: TreeModel, lam, k: int, tol: float = 1e-3,
                     n_schedule=DEFAULT_SCHEDULE, rng=0) -> LimitWalkPrefix:
    return ExactLimitSampler(tree, lam, tol, n_schedule).sample(k, rng)
