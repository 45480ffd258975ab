"""Map lattices, unit coordinates and radius-r neighbourhoods."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Optional, Sequence, Tuple

import numpy as np

from .errors import ScheduleError, ValidationError

TOPOLOGY_KINDS = ("grid", "string", "cylinder", "torus", "hexgrid")
SQUARE_KINDS = ("grid", "cylinder", "torus")

# Eight compass directions as (row step, column step), clockwise from north.
DIRECTIONS: Tuple[Tuple[str, int, int], ...] = (
    ("N", -1, 0),
    ("NE", -1, 1),
    ("E", 0, 1),
    ("SE", 1, 1),
    ("S", 1, 0),
    ("SW", 1, -1),
    ("W", 0, -1),
    ("NW", -1, -1),
)


@dataclass(frozen=True)
class MapTopology:
    """Lattice geometry of a map; units are numbered row-major from 0."""

    kind: str
    rows: int
    cols: int = 1

    def __post_init__(self) -> None:
        if self.kind not in TOPOLOGY_KINDS:
            raise ValidationError(
                f"unknown topology {self.kind!r}; expected one of {', '.join(TOPOLOGY_KINDS)}"
            )
        if self.rows < 1 or self.cols < 1:
            raise ValidationError(f"map needs rows, cols >= 1, got {self.rows}x{self.cols}")
        if self.kind == "string" and self.cols != 1:
            raise ValidationError("a string topology has exactly one column")

    @classmethod
    def string(cls, length: int) -> "MapTopology":
        return cls("string", length, 1)

    @property
    def unit_count(self) -> int:
        return self.rows * self.cols

    @property
    def is_square(self) -> bool:
        return self.kind in SQUARE_KINDS

    def spec(self) -> str:
        return f"{self.kind}:{self.rows}x{self.cols}"

    @classmethod
    def from_spec(cls, text: str) -> "MapTopology":
        kind, _, shape = text.partition(":")
        rows, _, cols = shape.partition("x")
        return cls(kind, int(rows), int(cols))


def _check_unit(topo: MapTopology, unit: int) -> None:
    if not 0 <= unit < topo.unit_count:
        raise IndexError(f"unit {unit} out of range for {topo.unit_count} units")


def unit_coords(topo: MapTopology, unit: int) -> Tuple[int, int]:
    """Return ``(row, col)`` of a unit."""
    _check_unit(topo, unit)
    return divmod(unit, topo.cols)


def _axial(row: int, col: int) -> Tuple[int, int]:
    # odd rows are shifted right by half a cell
    q = col - (row - (row & 1)) // 2
    return q, row


def lattice_distance(topo: MapTopology, a: int, b: int) -> int:
    """Chebyshev distance with per-kind wrapping, or hex distance on hexgrid."""
    ra, ca = unit_coords(topo, a)
    rb, cb = unit_coords(topo, b)
    if topo.kind == "hexgrid":
        qa, za = _axial(ra, ca)
        qb, zb = _axial(rb, cb)
        dq, dz = qa - qb, za - zb
        return max(abs(dq), abs(dz), abs(dq + dz))
    dr = abs(ra - rb)
    dc = abs(ca - cb)
    if topo.kind == "torus":
        dr = min(dr, topo.rows - dr)
    if topo.kind in ("cylinder", "torus"):
        dc = min(dc, topo.cols - dc)
    return max(dr, dc)


@lru_cache(maxsize=64)
def distance_matrix(topo: MapTopology) -> np.ndarray:
    """n x n matrix of lattice distances (read-only, cached per topology)."""
    n = topo.unit_count
    out = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            out[a, b] = lattice_distance(topo, a, b)
    out.setflags(write=False)
    return out


def neighborhood_mask(topo: MapTopology, r: int) -> np.ndarray:
    """Boolean n x n matrix, entry [i, j] true when j is in V_r(i)."""
    if r < 0:
        raise ValidationError(f"radius must be non-negative, got {r}")
    return distance_matrix(topo) <= r


def neighborhood(topo: MapTopology, unit: int, r: int) -> FrozenSet[int]:
    """V_r(unit): all units within lattice distance r, the unit included."""
    _check_unit(topo, unit)
    if r < 0:
        raise ValidationError(f"radius must be non-negative, got {r}")
    row = distance_matrix(topo)[unit]
    return frozenset(int(j) for j in np.flatnonzero(row <= r))


def step(topo: MapTopology, unit: int, drow: int, dcol: int) -> Optional[int]:
    """Unit reached by moving (drow, dcol) on a square lattice, or None past a border."""
    row, col = unit_coords(topo, unit)
    row += drow
    col += dcol
    if topo.kind == "torus":
        row %= topo.rows
    if topo.kind in ("cylinder", "torus"):
        col %= topo.cols
    if not (0 <= row < topo.rows and 0 <= col < topo.cols):
        return None
    return row * topo.cols + col


@dataclass(frozen=True)
class RadiusSchedule:
    """Piecewise-constant radius: ``steps`` holds (first iteration, radius) pairs."""

    steps: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ScheduleError("radius schedule is empty")
        if self.steps[0][0] != 0:
            raise ScheduleError("radius schedule must start at iteration 0")
        for (t0, r0), (t1, r1) in zip(self.steps, self.steps[1:]):
            if t1 <= t0:
                raise ScheduleError("radius thresholds must be strictly increasing")
            if r1 > r0:
                raise ScheduleError("radii must be non-increasing")
        if self.steps[-1][1] < 0:
            raise ScheduleError("radii must be non-negative")

    @classmethod
    def constant(cls, radius: int) -> "RadiusSchedule":
        return cls(((0, radius),))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, int]]) -> "RadiusSchedule":
        return cls(tuple((int(t), int(r)) for t, r in pairs))

    @classmethod
    def linear_decay(cls, start: int, iterations: int) -> "RadiusSchedule":
        """Drop from ``start`` to 0 by one at evenly spaced thresholds."""
        if start <= 0 or iterations <= 0:
            return cls.constant(0)
        span = iterations / (start + 1)
        pairs = []
        for k in range(start + 1):
            threshold = int(round(k * span))
            if pairs and threshold <= pairs[-1][0]:
                continue
            pairs.append((threshold, start - k))
        return cls(tuple(pairs))

    def radius_at(self, t: int) -> int:
        radius = self.steps[0][1]
        for threshold, r in self.steps:
            if threshold > t:
                break
            radius = r
        return radius

    @property
    def final_radius(self) -> int:
        return self.steps[-1][1]

    @property
    def last_change(self) -> int:
        return self.steps[-1][0]

    def next_change(self, t: int) -> Optional[int]:
        """First threshold after iteration ``t``, or None once the final radius is reached."""
        for threshold, _ in self.steps:
            if threshold > t:
                return threshold
        return None

    def describe(self) -> str:
        return ",".join(f"{r}@{t}" for t, r in self.steps)


__all__ = [
    "DIRECTIONS",
    "MapTopology",
    "RadiusSchedule",
    "SQUARE_KINDS",
    "TOPOLOGY_KINDS",
    "distance_matrix",
    "lattice_distance",
    "neighborhood",
    "neighborhood_mask",
    "step",
    "unit_coords",
]
