"""Super-classes: grouping map units by clustering their code vectors."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import linkage as scipy_linkage

from .dataset import DataMatrix, QualitativeColumn
from .errors import ValidationError
from .quantize import Assignment, CodeBook, GainSchedule, assign_all, som_train
from .topology import MapTopology, RadiusSchedule, neighborhood_mask

logger = logging.getLogger(__name__)

LINKAGES = ("ward", "complete", "average")
SUPERCLASS_METHODS = ("hierarchical", "string")

Merge = Tuple[int, int, float]


@dataclass(frozen=True, eq=False)
class SuperClassing:
    """Labels ``super_of[unit]`` in 0..count-1 plus the agglomeration that produced them."""

    super_of: np.ndarray
    count: int
    merge_history: Tuple[Merge, ...]
    contiguous: Tuple[bool, ...]
    method: str = "ward"

    def sizes(self) -> np.ndarray:
        return np.bincount(self.super_of, minlength=self.count)

    def members(self, label: int) -> List[int]:
        return [int(u) for u in np.flatnonzero(self.super_of == label)]


def _relabel_by_first_unit(raw: Sequence[int]) -> np.ndarray:
    mapping = {}
    out = np.empty(len(raw), dtype=np.int64)
    for unit, label in enumerate(raw):
        if label not in mapping:
            mapping[label] = len(mapping)
        out[unit] = mapping[label]
    return out


def cut_merge_history(history: Sequence[Merge], n: int, S: int) -> np.ndarray:
    """Replay the first n - S merges and label the resulting clusters."""
    if not 1 <= S <= n:
        raise ValidationError(f"super-class count must lie in [1, {n}], got {S}")
    parent = list(range(2 * n - 1))

    def find(node: int) -> int:
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    for k, (a, b, _) in enumerate(history[: n - S]):
        parent[find(int(a))] = n + k
        parent[find(int(b))] = n + k
    return _relabel_by_first_unit([find(u) for u in range(n)])


def contiguity_report(sc: SuperClassing, topo: MapTopology) -> List[int]:
    """Connected-component count of every super-class under radius-1 adjacency."""
    adjacency = neighborhood_mask(topo, 1)
    components = [0] * sc.count
    seen = np.zeros(topo.unit_count, dtype=bool)
    for start in range(topo.unit_count):
        if seen[start]:
            continue
        label = sc.super_of[start]
        components[label] += 1
        seen[start] = True
        queue = deque([start])
        while queue:
            unit = queue.popleft()
            for other in np.flatnonzero(adjacency[unit]):
                if not seen[other] and sc.super_of[other] == label:
                    seen[other] = True
                    queue.append(other)
    return components


def _with_contiguity(
    super_of: np.ndarray,
    count: int,
    history: Tuple[Merge, ...],
    topo: MapTopology,
    method: str,
) -> SuperClassing:
    draft = SuperClassing(super_of, count, history, (), method)
    components = contiguity_report(draft, topo)
    broken = [k for k, c in enumerate(components) if c > 1]
    if broken:
        logger.info("super-classes %s are not contiguous on the map", broken)
    return SuperClassing(super_of, count, history, tuple(c == 1 for c in components), method)


def hierarchical_superclasses(codes: CodeBook, S: int, linkage: str = "ward") -> SuperClassing:
    """Agglomerative clustering of the code vectors cut at S clusters."""
    if linkage not in LINKAGES:
        raise ValidationError(f"unknown linkage {linkage!r}; expected one of {', '.join(LINKAGES)}")
    n = codes.unit_count
    if not 1 <= S <= n:
        raise ValidationError(f"super-class count must lie in [1, {n}], got {S}")
    if n == 1:
        history: Tuple[Merge, ...] = ()
    else:
        Z = scipy_linkage(np.asarray(codes.codes), method=linkage, metric="euclidean")
        history = tuple((int(a), int(b), float(d)) for a, b, d, _ in Z)
    labels = cut_merge_history(history, n, S)
    return _with_contiguity(labels, S, history, codes.topo, linkage)


def string_superclasses(
    codes: CodeBook,
    S: int,
    seed: int,
    iterations: Optional[int] = None,
    eps0: float = 0.5,
    eps_final: float = 0.01,
) -> SuperClassing:
    """Ordered super-classes from a Kohonen string of S units trained on the codes.

    Each unit takes the position of its winner on the string; positions with
    no unit are dropped and the rest renumbered in string order, so labels
    stay ordered along the string.
    """
    n = codes.unit_count
    if not 1 <= S <= n:
        raise ValidationError(f"super-class count must lie in [1, {n}], got {S}")
    points = DataMatrix.from_array(np.asarray(codes.codes))
    string = MapTopology.string(S)
    T = iterations if iterations is not None else max(30 * n, 6 * S)
    gain = GainSchedule("harmonic", eps0, eps_final, T)
    radii = RadiusSchedule.linear_decay(max(1, S // 2 - 1) if S > 1 else 0, T)
    # string starts evenly spaced between the codes with the smallest and largest first component
    first = int(np.argmin(codes.codes[:, 0]))
    last = int(np.argmax(codes.codes[:, 0]))
    weights = np.linspace(0.0, 1.0, S)[:, None]
    start = codes.codes[first] + weights * (codes.codes[last] - codes.codes[first])
    trained = som_train(points, CodeBook(string, start), gain, radii, seed, iterations=T)
    positions = assign_all(trained, points).class_of
    used = sorted(set(int(p) for p in positions))
    rank = {p: k for k, p in enumerate(used)}
    labels = np.array([rank[int(p)] for p in positions], dtype=np.int64)
    if len(used) < S:
        logger.info("string super-classes: %d of %d string units used", len(used), S)
    return _with_contiguity(labels, len(used), (), codes.topo, "string")


def as_qualitative(sc: SuperClassing, assignment: Assignment, name: str = "superclass") -> QualitativeColumn:
    """Super-class of each row's unit, as a qualitative variable."""
    levels = tuple(f"SC{k + 1}" for k in range(sc.count))
    return QualitativeColumn(name, levels, sc.super_of[assignment.class_of])


__all__ = [
    "LINKAGES",
    "SUPERCLASS_METHODS",
    "SuperClassing",
    "as_qualitative",
    "contiguity_report",
    "cut_merge_history",
    "hierarchical_superclasses",
    "string_superclasses",
]
