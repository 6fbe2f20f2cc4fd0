"""Example trees and tree surgery.

Spherically symmetric trees are described by a :class:`LevelProfile`, the
lazily generated sequence of per-level child counts.  Degree sequences of
the floor constructions are evaluated in exact rational arithmetic: with
``x = p/q`` the n-th floor is ``p**n // (q**n * prod)`` on big integers, so
there is no float drift however deep the tree is explored.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidInput
from .numerics import bisect_increasing
from .trees import FiniteTree, Node, TreeModel, as_fraction


class LevelProfile:
    """Per-level child counts l_1, l_2, ... and exact level sizes |T_n|."""

    name = "profile"

    def __init__(self):
        self._ell = [None]  # 1-based
        self._size = [1]

    def _next(self, n: int) -> int:
        raise NotImplementedError

    def _extend(self, n: int):
        while len(self._ell) <= n:
            i = len(self._ell)
            ell = self._next(i)
            if ell < 1:
                raise InvalidInput(
                    f"{self.name}: child count at level {i} evaluates to {ell}"
                )
            self._ell.append(ell)
            self._size.append(self._size[-1] * ell)

    def child_count(self, i: int) -> int:
        if i < 1:
            raise InvalidInput("levels are numbered from 1")
        self._extend(i)
        return self._ell[i]

    def size(self, n: int) -> int:
        """|T_n| = l_1 * ... * l_n as an exact integer."""
        self._extend(n)
        return self._size[n]

    def child_counts(self, n: int) -> list[int]:
        self._extend(n)
        return self._ell[1 : n + 1]

    def sizes(self, n: int) -> list[int]:
        self._extend(n)
        return self._size[: n + 1]

    def scaled_tail_bound(self, lam, n: int):
        """Upper bound on |T_n| * sum_{j>n} lam**(n-j) / |T_j|, or None."""
        return None


class ConstantProfile(LevelProfile):
    """b children at every level: a ray for b = 1, the b-ary tree otherwise."""

    def __init__(self, b: int):
        if b < 1:
            raise InvalidInput("branching must be at least 1")
        super().__init__()
        self.b = b
        self.name = "ray" if b == 1 else f"bary:{b}"

    def _next(self, n):
        return self.b

    def scaled_tail_bound(self, lam, n):
        if lam * self.b > 1:
            return 1 / (lam * self.b - 1)
        return None


class FloorProfile(LevelProfile):
    """l_n = floor(x**n / (n**k * l_1 * ... * l_{n-1})); k = 0 is the plain case."""

    def __init__(self, x, k: int = 0):
        super().__init__()
        self.x = as_fraction(x)
        self.k = k
        if self.x < 1:
            raise InvalidInput("x must be at least 1")
        self._pn = 1  # numerator of x**(n-1)
        self._qn = 1
        self.name = f"prop5:x={self.x}" if k == 0 else f"prop4:x={self.x},k={k}"

    def _next(self, n):
        self._pn *= self.x.numerator
        self._qn *= self.x.denominator
        return self._pn // (self._qn * n**self.k * self._size[-1])


class Prop5Profile(FloorProfile):
    def __init__(self, x):
        super().__init__(x, 0)

    def scaled_tail_bound(self, lam, n):
        # |T_j| >= x**(j-1) (x-1), summed as a geometric series
        x = self.x
        if x == 1:
            return 1 / (lam - 1) if lam > 1 else None
        if lam * x <= 1:
            return None
        ratio = Fraction(self.size(n)) / x**n
        return ratio * x / ((x - 1) * (lam * x - 1))


class Prop5BarProfile(LevelProfile):
    """The Prop5 sequence with doubled degree at perfect-square levels."""

    def __init__(self, x):
        super().__init__()
        self.base = Prop5Profile(x)
        self.x = self.base.x
        self.name = f"prop5bar:x={self.x}"

    def _next(self, n):
        ell = self.base.child_count(n)
        r = math.isqrt(n)
        return 2 * ell if r * r == n else ell

    def scaled_tail_bound(self, lam, n):
        # for j > n: |Tbar_j| >= 2**isqrt(n+1) * x**(j-1) (x-1)
        x = self.x
        boost = Fraction(1, 2 ** math.isqrt(n + 1))
        if x == 1:
            if lam <= 1:
                return None
            return self.size(n) * boost / (lam - 1)
        if lam * x <= 1:
            return None
        ratio = Fraction(self.size(n)) / x**n
        return ratio * boost * x / ((x - 1) * (lam * x - 1))


class Prop4Profile(FloorProfile):
    def __init__(self, x, k: int):
        if k < 1:
            raise InvalidInput("k must be a positive integer")
        super().__init__(x, k)
        if self.x <= 1:
            raise InvalidInput("x must exceed 1")


class SSTree(TreeModel):
    """Spherically symmetric tree: every depth-d vertex has l_{d+1} children."""

    leafless = True

    def __init__(self, profile: LevelProfile):
        super().__init__()
        self.profile = profile
        self.name = profile.name

    def child_states(self, node):
        return [None] * self.profile.child_count(node.depth + 1)

    def key(self, node):
        return node.depth

    def tail_bound(self, node, lam):
        ray = 1 / (lam - 1) if lam > 1 else None
        ss = self.profile.scaled_tail_bound(lam, node.depth)
        if ray is None:
            return ss
        if ss is None:
            return ray
        return min(ray, ss)

    def level_counts(self, n_max, budget=None):
        return self.profile.sizes(n_max)

    def __repr__(self):
        return f"SSTree({self.name})"


def ray() -> SSTree:
    return SSTree(ConstantProfile(1))


def b_ary(b: int) -> SSTree:
    return SSTree(ConstantProfile(b))


def binary() -> SSTree:
    return b_ary(2)


def ss_tree_prop5(x) -> SSTree:
    """Floor-construction tree with |T_n| squeezed between x^n - x^(n-1) and x^n."""
    return SSTree(Prop5Profile(x))


def ss_tree_prop5_bar(x) -> SSTree:
    return SSTree(Prop5BarProfile(x))


def ss_tree_prop4(x, k: int) -> SSTree:
    profile = Prop4Profile(x, k)
    # surface early degenerate floors at construction time
    profile.child_counts(16)
    return SSTree(profile)


class JoinTree(TreeModel):
    """A new root whose two children root copies of ``left`` and ``right``."""

    def __init__(self, left: TreeModel, right: TreeModel):
        super().__init__()
        self.sides = (left, right)
        self.leafless = left.leafless and right.leafless

    def root_state(self):
        return None

    def child_states(self, node):
        if node.state is None:
            return [(i, t.root()) for i, t in enumerate(self.sides)]
        side, inner = node.state
        return [(side, c) for c in self.sides[side].children(inner)]

    def key(self, node):
        if node.state is None:
            return "root"
        side, inner = node.state
        k = self.sides[side].key(inner)
        return None if k is None else (side, k)

    def infinite_descent(self, node):
        if node.state is None:
            vals = [t.infinite_descent(t.root()) for t in self.sides]
            if any(vals):
                return True
            return None if None in vals else False
        side, inner = node.state
        return self.sides[side].infinite_descent(inner)

    def tail_bound(self, node, lam):
        if node.state is None:
            return super().tail_bound(node, lam)
        side, inner = node.state
        return self.sides[side].tail_bound(inner, lam)


def join(t1: TreeModel, t2: TreeModel) -> JoinTree:
    return JoinTree(t1, t2)


@dataclass
class GraftSpec:
    """Graft a copy of ``scion`` at every host vertex in ``sites``.

    Sites are host nodes or their index paths from the host root.
    """

    host: TreeModel
    sites: object
    scion: TreeModel


class GraftTree(TreeModel):
    """Host tree with the scion's root identified with each site.

    The site keeps its own host children; the scion's root children are
    appended after them.
    """

    def __init__(self, host: TreeModel, sites, scion: TreeModel):
        super().__init__()
        paths = set()
        for s in sites:
            path = s.path() if isinstance(s, Node) else tuple(s)
            host.node_at(path)  # validates
            paths.add(path)
        self.host = host
        self.scion = scion
        self.sites = frozenset(paths)
        self.leafless = host.leafless and scion.leafless

    def root_state(self):
        return ("h", self.host.root(), self.sites)

    def child_states(self, node):
        if node.state[0] == "s":
            return [("s", c) for c in self.scion.children(node.state[1])]
        _, inner, pending = node.state
        out = []
        for i, c in enumerate(self.host.children(inner)):
            below = frozenset(p[1:] for p in pending if p and p[0] == i)
            out.append(("h", c, below))
        if () in pending:
            out.extend(("s", c) for c in self.scion.children(self.scion.root()))
        return out

    def key(self, node):
        if node.state[0] == "s":
            k = self.scion.key(node.state[1])
            return None if k is None else ("s", k)
        _, inner, pending = node.state
        if pending:
            return None
        k = self.host.key(inner)
        return None if k is None else ("h", k)

    def infinite_descent(self, node):
        if node.state[0] == "s":
            return self.scion.infinite_descent(node.state[1])
        _, inner, pending = node.state
        own = self.host.infinite_descent(inner)
        if own:
            return True
        if pending and self.scion.infinite_descent(self.scion.root()):
            return True
        return own

    def tail_bound(self, node, lam):
        # extra branches only lower resistance, so host bounds stay valid
        if node.state[0] == "s":
            return self.scion.tail_bound(node.state[1], lam)
        return self.host.tail_bound(node.state[1], lam)


def graft(spec: GraftSpec) -> GraftTree:
    return GraftTree(spec.host, spec.sites, spec.scion)


class PeriodicTree(TreeModel):
    """Infinite tree obtained by grafting copies of a finite tree at all leaves,
    recursively.  A node is its position inside the current copy; a leaf
    position behaves like the root of a fresh copy.
    """

    leafless = True

    def __init__(self, base: FiniteTree):
        super().__init__()
        if base.is_leaf(0):
            raise InvalidInput("periodic closure needs a tree with at least one edge")
        self.base = base

    def root_state(self):
        return 0

    def _norm(self, vid):
        return 0 if self.base.is_leaf(vid) else vid

    def child_states(self, node):
        return list(self.base.vertex_children(self._norm(node.state)))

    def key(self, node):
        return self._norm(node.state)


def periodic_closure(t: FiniteTree) -> PeriodicTree:
    return PeriodicTree(t)


def path_polynomial(t: FiniteTree):
    """Coefficients a_d = number of root-to-leaf paths of length d."""
    depths = t.leaf_depths()
    coeffs = [0] * (max(depths) + 1)
    for d in depths:
        coeffs[d] += 1
    return coeffs


def periodic_critical_lambda(t: FiniteTree, tol: float = 1e-12) -> float:
    """Root in (0, 1] of sum over root-to-leaf paths g of x**len(g) = 1."""
    if t.is_leaf(0):
        raise InvalidInput("periodic closure needs a tree with at least one edge")
    coeffs = path_polynomial(t)

    def f(x):
        return math.fsum(c * x**d for d, c in enumerate(coeffs))

    if f(1.0) < 1:
        raise AssertionError("path polynomial below 1 at x = 1")
    return bisect_increasing(f, 1.0, 1e-9, 1.0, tol)


def _parse_params(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if not part:
            continue
        if "=" not in part:
            raise InvalidInput(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _split_join(body: str):
    depth = 0
    for i, ch in enumerate(body):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "|" and depth == 0:
            return body[:i], body[i + 1 :]
    raise InvalidInput("join needs two trees separated by '|'")


def parse_tree_spec(text: str) -> TreeModel:
    """Build a tree from its command-line description.

    Accepted forms: ``ray``, ``binary``, ``bary:<b>``, ``prop5:x=3/2``,
    ``prop5bar:x=2``, ``prop4:x=2,k=1``, ``finite:<parens>``,
    ``periodic:<parens or file>``, ``saw:<domain>[,pruned]`` and
    ``join[<tree>|<tree>]``.
    """
    text = text.strip()
    if text.startswith("join[") and text.endswith("]"):
        a, b = _split_join(text[5:-1])
        return join(parse_tree_spec(a), parse_tree_spec(b))
    name, _, rest = text.partition(":")
    name = name.lower()
    if name == "ray":
        return ray()
    if name == "binary":
        return binary()
    if name == "bary":
        try:
            return b_ary(int(rest))
        except ValueError:
            raise InvalidInput(f"bad branching in {text!r}") from None
    if name in ("prop5", "prop5bar", "prop4"):
        params = _parse_params(rest)
        if "x" not in params:
            raise InvalidInput(f"{name} needs x=<rational>")
        x = as_fraction(params["x"])
        if name == "prop5":
            return ss_tree_prop5(x)
        if name == "prop5bar":
            return ss_tree_prop5_bar(x)
        if "k" not in params:
            raise InvalidInput("prop4 needs k=<int>")
        return ss_tree_prop4(x, int(params["k"]))
    if name in ("finite", "periodic"):
        src = rest.strip()
        if not src.startswith("(") and os.path.exists(src):
            with open(src) as fh:
                src = fh.read()
        t = FiniteTree.parse(src)
        return t if name == "finite" else periodic_closure(t)
    if name == "saw":
        from .lattice import DomainSpec
        from .saw_tree import as_tree

        dom, _, flag = rest.partition(",")
        return as_tree(DomainSpec.parse(dom), pruned=flag.strip() == "pruned")
    raise InvalidInput(f"unknown tree spec {text!r}")
