"""Lazily expanded rooted trees.

Every tree in the package (self-avoiding trees, spherically symmetric
gallery trees, joins, grafts, periodic closures) is a :class:`TreeModel`.
Nodes are small immutable handles linked to their parent; the children of a
node are computed on first request and cached on the node, so two
traversals of the same tree always see the same child order.

Trees may expose extra structure through optional hooks:

``key(node)``
    A hashable label such that nodes with equal keys root isomorphic
    (ordered) subtrees, or ``None`` when no such label is known.  Recursive
    computations memoize on it, which is what makes depth-2000 reductions
    on spherically symmetric trees cheap.
``infinite_descent(node)``
    Whether the node has an infinite line of descent (``None`` = unknown).
``tail_bound(node, lam)``
    An upper bound on the resistance from ``node`` to infinity, scaled by
    ``lam ** depth(node)``, or ``None``.  Must depend only on ``key(node)``.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

from .errors import BudgetExceeded, InvalidInput

DEFAULT_NODE_BUDGET = 5_000_000


class Node:
    """Handle on a tree vertex: parent link, index among siblings, depth."""

    __slots__ = ("parent", "index", "depth", "state", "kids")

    def __init__(self, parent, index, depth, state=None):
        self.parent = parent
        self.index = index
        self.depth = depth
        self.state = state
        self.kids = None

    def path(self) -> tuple[int, ...]:
        """Child indices from the root down to this node."""
        out = []
        node = self
        while node.parent is not None:
            out.append(node.index)
            node = node.parent
        return tuple(reversed(out))

    def ancestors(self):
        """This node and its ancestors, root last."""
        node = self
        while node is not None:
            yield node
            node = node.parent

    def ancestor_at(self, depth: int) -> "Node":
        node = self
        while node.depth > depth:
            node = node.parent
        return node

    def __repr__(self):
        return f"Node(depth={self.depth}, path={self.path()})"


class TreeModel:
    """Base class for lazily expandable rooted trees."""

    #: LevelProfile for spherically symmetric trees, else None.
    profile = None
    #: True when every vertex has an infinite line of descent.
    leafless = False

    def __init__(self):
        self._root = None
        self._lock = threading.RLock()

    def root(self) -> Node:
        if self._root is None:
            self._root = Node(None, 0, 0, self.root_state())
        return self._root

    def root_state(self):
        return None

    def children(self, node: Node) -> list[Node]:
        kids = node.kids
        if kids is None:
            with self._lock:
                if node.kids is None:
                    node.kids = [
                        Node(node, i, node.depth + 1, s)
                        for i, s in enumerate(self.child_states(node))
                    ]
                kids = node.kids
        return kids

    def child_states(self, node: Node) -> list:
        """States of the children of ``node``, in canonical order."""
        raise NotImplementedError

    def depth(self, node: Node) -> int:
        return node.depth

    def key(self, node: Node):
        return None

    def infinite_descent(self, node: Node):
        return True if self.leafless else None

    def tail_bound(self, node: Node, lam):
        """Scaled ray-closure bound, valid for lam > 1 on infinite branches."""
        if lam > 1 and self.infinite_descent(node):
            return 1 / (lam - 1)
        return None

    def head(self, node: Node):
        """Lattice point associated with the node, for walk trees."""
        return None

    def node_at(self, path) -> Node:
        node = self.root()
        for i in path:
            kids = self.children(node)
            if not 0 <= i < len(kids):
                raise InvalidInput(f"no node at path {tuple(path)}")
            node = kids[i]
        return node

    def level_counts(self, n_max: int, budget: int | None = None) -> list[int]:
        return level_counts(self, n_max, budget)


def level_counts(tree: TreeModel, n_max: int, budget: int | None = None) -> list[int]:
    """Exact |T_0|, ..., |T_{n_max}| by DFS, memoized on subtree keys.

    ``budget`` caps the number of node expansions; exceeding it raises
    :class:`BudgetExceeded` carrying the counts for the levels that were
    complete.
    """
    if n_max < 0:
        raise InvalidInput("n_max must be non-negative")
    budget = DEFAULT_NODE_BUDGET if budget is None else budget
    memo: dict = {}
    work = [0]

    try:
        return _iterative_counts(tree, n_max, memo, work, budget)
    except _Stop:
        pass
    # find the deepest fully countable level within budget
    for depth in range(n_max - 1, -1, -1):
        memo.clear()
        work[0] = 0
        try:
            partial = _iterative_counts(tree, depth, memo, work, budget)
        except _Stop:
            continue
        raise BudgetExceeded(
            f"level counts beyond depth {depth} exceed budget of {budget} expansions",
            depth=depth,
            partial=partial,
        )
    raise BudgetExceeded("budget too small for any level", depth=-1, partial=[])


class _Stop(Exception):
    pass


def _iterative_counts(tree, n_max, memo, work, budget):
    """Post-order version of the memoized count (no recursion limit)."""
    root = tree.root()
    # stack frames: [node, remaining, child_iter, accumulator, key]
    stack = [[root, n_max, None, None, tree.key(root)]]
    result = None
    while stack:
        frame = stack[-1]
        node, remaining, it, acc, k = frame
        if it is None:
            if k is not None and (k, remaining) in memo:
                stack.pop()
                result = memo[(k, remaining)]
                if stack:
                    _merge(stack[-1][3], result)
                continue
            frame[3] = acc = [1] + [0] * remaining
            if remaining == 0:
                stack.pop()
                result = acc
                if stack:
                    _merge(stack[-1][3], result)
                continue
            work[0] += 1
            if work[0] > budget:
                raise _Stop
            frame[2] = it = iter(tree.children(node))
        child = next(it, None)
        if child is None:
            stack.pop()
            if k is not None:
                memo[(k, remaining)] = acc
            result = acc
            if stack:
                _merge(stack[-1][3], result)
        else:
            stack.append([child, remaining - 1, None, None, tree.key(child)])
    return result


def _merge(acc, sub):
    for j, c in enumerate(sub):
        acc[j + 1] += c


def level_count(tree: TreeModel, n: int, budget: int | None = None) -> int:
    """Exact number of nodes at depth ``n``."""
    return tree.level_counts(n, budget)[n]


def growth_estimate(tree: TreeModel, n_max: int, budget: int | None = None):
    """Pairs ``(|T_n|, |T_n| ** (1/n))`` for n = 1..n_max."""
    counts = tree.level_counts(n_max, budget)
    out = []
    for n in range(1, n_max + 1):
        c = counts[n]
        out.append((c, _nth_root(c, n)))
    return out


def _nth_root(c: int, n: int) -> float:
    if c == 0:
        return 0.0
    return math.exp(math.log(c) / n)


class FiniteTree(TreeModel):
    """An explicit finite rooted tree.

    Built from nested parentheses: ``"()"`` is a single vertex,
    ``"(()())"`` a root with two leaf children.
    """

    def __init__(self, child_lists):
        super().__init__()
        # child_lists[i] = list of child ids of vertex i; vertex 0 is the root
        self._kids = [list(c) for c in child_lists]

    @classmethod
    def parse(cls, text: str) -> "FiniteTree":
        s = "".join(text.split())
        if not s or s[0] != "(":
            raise InvalidInput("tree text must start with '('")
        kids: list[list[int]] = []
        stack: list[int] = []
        for pos, ch in enumerate(s):
            if ch == "(":
                vid = len(kids)
                kids.append([])
                if stack:
                    kids[stack[-1]].append(vid)
                elif vid:
                    raise InvalidInput(f"multiple roots at position {pos}")
                stack.append(vid)
            elif ch == ")":
                if not stack:
                    raise InvalidInput(f"unbalanced ')' at position {pos}")
                stack.pop()
            else:
                raise InvalidInput(f"unexpected character {ch!r} in tree text")
        if stack:
            raise InvalidInput("unbalanced '(' in tree text")
        return cls(kids)

    def to_parens(self, vid: int = 0) -> str:
        return "(" + "".join(self.to_parens(c) for c in self._kids[vid]) + ")"

    def root_state(self):
        return 0

    def child_states(self, node):
        return list(self._kids[node.state])

    def key(self, node):
        return node.state

    def infinite_descent(self, node):
        return False

    def tail_bound(self, node, lam):
        return None

    @property
    def size(self) -> int:
        return len(self._kids)

    def vertex_children(self, vid: int) -> list[int]:
        return self._kids[vid]

    def is_leaf(self, vid: int) -> bool:
        return not self._kids[vid]

    def leaf_depths(self) -> list[int]:
        """Depths of all leaves (a lone root counts as a leaf at depth 0)."""
        out = []
        stack = [(0, 0)]
        while stack:
            vid, d = stack.pop()
            if self._kids[vid]:
                stack.extend((c, d + 1) for c in self._kids[vid])
            else:
                out.append(d)
        return sorted(out)

    def height(self) -> int:
        return max(self.leaf_depths())


def as_fraction(value) -> Fraction:
    """Exact rational for ints, Fractions, decimal strings and floats.

    Floats go through their shortest repr, so ``1.3`` becomes ``13/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InvalidInput(f"not a rational number: {value!r}") from None
    return Fraction(value)
