"""Square-lattice geometry: points, planar domains and nearest-neighbour moves.

Domains are written in configs and on the command line as one of
``plane``, ``halfplane``, ``upperhalfplane``, ``quadrant`` or ``strip:<L>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidInput


class LatticePoint(NamedTuple):
    x: int
    y: int

    def __add__(self, other):  # type: ignore[override]
        return LatticePoint(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return LatticePoint(self.x - other[0], self.y - other[1])


ORIGIN = LatticePoint(0, 0)

# Canonical child order used everywhere: East, North, West, South.
DIRECTIONS = {
    "E": LatticePoint(1, 0),
    "N": LatticePoint(0, 1),
    "W": LatticePoint(-1, 0),
    "S": LatticePoint(0, -1),
}
STEP_ORDER = ("E", "N", "W", "S")
STEPS = tuple(DIRECTIONS[d] for d in STEP_ORDER)
STEP_NAME = {v: k for k, v in DIRECTIONS.items()}

PLANE = "plane"
HALFPLANE = "halfplane"
UPPER_HALFPLANE = "upperhalfplane"
QUADRANT = "quadrant"
STRIP = "strip"
_KINDS = (PLANE, HALFPLANE, UPPER_HALFPLANE, QUADRANT, STRIP)


@dataclass(frozen=True)
class DomainSpec:
    """A planar subdomain of Z^2 that always contains the origin.

    ``halfplane`` is the closed half-plane y >= 0, ``upperhalfplane`` is
    y > 0 together with the origin, ``quadrant`` is x, y >= 0 and
    ``strip`` is 0 <= y <= width.
    """

    kind: str
    width: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidInput(f"unknown domain kind {self.kind!r}")
        if self.kind == STRIP:
            if not isinstance(self.width, int) or self.width < 1:
                raise InvalidInput("strip width must be a positive integer")
        elif self.width is not None:
            raise InvalidInput(f"domain {self.kind!r} takes no width")

    @classmethod
    def parse(cls, text: str) -> "DomainSpec":
        text = text.strip().lower()
        if text.startswith("strip:"):
            try:
                width = int(text.split(":", 1)[1])
            except ValueError:
                raise InvalidInput(f"bad strip width in {text!r}") from None
            return cls(STRIP, width)
        if text in (PLANE, "fullplane"):
            return cls(PLANE)
        return cls(text)

    def __str__(self):
        if self.kind == STRIP:
            return f"strip:{self.width}"
        return self.kind

    def contains(self, p) -> bool:
        x, y = p
        kind = self.kind
        if kind == PLANE:
            return True
        if kind == HALFPLANE:
            return y >= 0
        if kind == UPPER_HALFPLANE:
            return y > 0 or (x == 0 and y == 0)
        if kind == QUADRANT:
            return x >= 0 and y >= 0
        return 0 <= y <= self.width

    def neighbors(self, p) -> set[LatticePoint]:
        if not self.contains(p):
            raise InvalidInput(f"{tuple(p)} is not in domain {self}")
        x, y = p
        out = set()
        for dx, dy in STEPS:
            q = LatticePoint(x + dx, y + dy)
            if self.contains(q):
                out.add(q)
        return out


FULL_PLANE = DomainSpec(PLANE)
CLOSED_HALF_PLANE = DomainSpec(HALFPLANE)
UPPER_HALF_PLANE = DomainSpec(UPPER_HALFPLANE)
FIRST_QUADRANT = DomainSpec(QUADRANT)


def strip(width: int) -> DomainSpec:
    return DomainSpec(STRIP, width)


def contains(domain: DomainSpec, p) -> bool:
    return domain.contains(p)


def neighbors(p, domain: DomainSpec) -> set[LatticePoint]:
    return domain.neighbors(p)
