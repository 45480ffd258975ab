"""Qualitative tables and the Kohonen correspondence algorithms.

Tables follow the usual coding: a complete disjunctive table D (one column
per modality, one 1 per variable block in each row), the Burt table
B = D'D, and for two variables their contingency table. Chi-square
corrections divide each entry by the square roots of its margins so that
Euclidean distance on the corrected rows emulates the chi-square metric.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .dataset import DataMatrix, QualitativeColumn
from .errors import DegenerateDataError, ValidationError
from .init import init_random_box
from .quantize import CodeBook, GainSchedule, assign_all, som_train, sq_distances
from .rng import Stream
from .topology import MapTopology, RadiusSchedule, neighborhood_mask

logger = logging.getLogger(__name__)

CORRECTION_KINDS = ("burt_chi2", "disjunctive_chi2", "row_profiles", "col_profiles")
KDISJ_ITERATIONS_PER_ENTRY = 15

StepCallback = Callable[[int, np.ndarray], None]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """p x q cross-counts of two qualitative variables."""

    counts: np.ndarray
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValidationError("contingency counts must be a matrix")
        if counts.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValidationError("contingency labels do not match the counts shape")
        if (counts < 0).any():
            raise ValidationError("contingency counts must be non-negative")
        for axis, labels in ((1, self.row_labels), (0, self.col_labels)):
            empty = np.flatnonzero(counts.sum(axis=axis) == 0)
            if empty.size:
                raise DegenerateDataError(f"modality {labels[empty[0]]!r} has a zero margin")
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "row_labels", tuple(str(x) for x in self.row_labels))
        object.__setattr__(self, "col_labels", tuple(str(x) for x in self.col_labels))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.counts.shape

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, eq=False)
class DisjunctiveTable:
    """N x M one-hot coding of K qualitative variables."""

    entries: np.ndarray
    block_widths: Tuple[int, ...]
    modality_labels: Tuple[str, ...]
    row_labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.int64)
        widths = tuple(int(w) for w in self.block_widths)
        if entries.ndim != 2 or entries.shape[0] == 0:
            raise ValidationError("disjunctive table is empty")
        if sum(widths) != entries.shape[1] or len(self.modality_labels) != entries.shape[1]:
            raise ValidationError("variable blocks do not cover the disjunctive columns")
        if not np.isin(entries, (0, 1)).all():
            raise ValidationError("disjunctive entries must be 0 or 1")
        start = 0
        for width in widths:
            if not (entries[:, start:start + width].sum(axis=1) == 1).all():
                raise ValidationError("every row needs exactly one 1 per variable block")
            start += width
        object.__setattr__(self, "entries", _frozen(entries))
        object.__setattr__(self, "block_widths", widths)
        object.__setattr__(self, "modality_labels", tuple(self.modality_labels))
        object.__setattr__(self, "row_labels", tuple(self.row_labels))

    @property
    def n_individuals(self) -> int:
        return self.entries.shape[0]

    @property
    def n_modalities(self) -> int:
        return self.entries.shape[1]

    @property
    def n_variables(self) -> int:
        return len(self.block_widths)

    @property
    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)


@dataclass(frozen=True, eq=False)
class BurtTable:
    """M x M symmetric table of all pairwise modality cross-counts."""

    counts: np.ndarray
    block_widths: Tuple[int, ...]
    modality_labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValidationError("Burt table must be square")
        if not np.array_equal(counts, counts.T):
            raise ValidationError("Burt table must be symmetric")
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "block_widths", tuple(int(w) for w in self.block_widths))
        object.__setattr__(self, "modality_labels", tuple(self.modality_labels))

    @property
    def n_variables(self) -> int:
        return len(self.block_widths)

    @classmethod
    def from_disjunctive(cls, D: DisjunctiveTable) -> "BurtTable":
        return cls(D.entries.T @ D.entries, D.block_widths, D.modality_labels)


@dataclass(frozen=True, eq=False)
class CorrectedMatrix:
    values: np.ndarray
    kind: str
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        if self.kind not in CORRECTION_KINDS:
            raise ValidationError(f"unknown correction {self.kind!r}")
        values = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(values)) or (values < 0).any():
            raise ValidationError("corrected entries must be finite and non-negative")
        object.__setattr__(self, "values", _frozen(values))

    def as_data(self) -> DataMatrix:
        return DataMatrix.from_array(self.values, row_labels=self.row_labels, col_labels=self.col_labels)


class QualitativeTables(NamedTuple):
    disjunctive: DisjunctiveTable
    burt: BurtTable
    contingency: Optional[ContingencyTable]
    kept_rows: np.ndarray


@dataclass(frozen=True, eq=False)
class ModalityMap:
    """Trained code book with the unit of every modality and, when placed, every individual."""

    codebook: CodeBook
    modality_units: Dict[str, int]
    individual_units: Optional[np.ndarray] = None


def modality_labels(quals: Sequence[QualitativeColumn]) -> Tuple[str, ...]:
    """Level names, qualified as ``variable:level`` when a name repeats across variables."""
    names = [level for q in quals for level in q.level_names]
    repeated = {name for name, count in Counter(names).items() if count > 1}
    labels = []
    for q in quals:
        for level in q.level_names:
            labels.append(f"{q.name}:{level}" if level in repeated else level)
    return tuple(labels)


def build_tables(
    quals: Sequence[QualitativeColumn],
    row_labels: Optional[Sequence[str]] = None,
) -> QualitativeTables:
    """Disjunctive and Burt tables (plus the contingency table when K = 2).

    Rows with a missing answer on any variable are left out; ``kept_rows``
    holds the indices of the rows that were coded.
    """
    if not quals:
        raise ValidationError("at least one qualitative variable is needed")
    n = quals[0].codes.shape[0]
    if any(q.codes.shape[0] != n for q in quals):
        raise ValidationError("qualitative variables cover different rows")
    codes = np.stack([q.codes for q in quals], axis=1)
    keep = np.flatnonzero((codes >= 0).all(axis=1))
    if keep.size == 0:
        raise ValidationError("no row answers every qualitative variable")
    if keep.size < n:
        logger.warning("%d rows with missing qualitative answers excluded", n - keep.size)
    labels = modality_labels(quals)
    widths = tuple(q.level_count for q in quals)
    offsets = np.concatenate([[0], np.cumsum(widths)[:-1]])
    entries = np.zeros((keep.size, sum(widths)), dtype=np.int64)
    rows = np.arange(keep.size)
    for k in range(len(quals)):
        entries[rows, offsets[k] + codes[keep, k]] = 1
    unused = np.flatnonzero(entries.sum(axis=0) == 0)
    if unused.size:
        raise DegenerateDataError(f"modality {labels[unused[0]]!r} is chosen by no individual")
    names = list(row_labels) if row_labels is not None else [str(i) for i in range(n)]
    D = DisjunctiveTable(entries, widths, labels, tuple(names[i] for i in keep))
    B = BurtTable.from_disjunctive(D)
    contingency = None
    if len(quals) == 2:
        w = widths[0]
        contingency = ContingencyTable(B.counts[:w, w:], labels[:w], labels[w:])
    return QualitativeTables(D, B, contingency, keep)


def _require_margins(sums: np.ndarray, labels: Sequence[str]) -> None:
    zero = np.flatnonzero(sums <= 0)
    if zero.size:
        raise DegenerateDataError(f"modality {labels[zero[0]]!r} has a zero margin")


def chi2_correct_burt(B: BurtTable) -> CorrectedMatrix:
    """n_ij / (sqrt(n_i.) sqrt(n_.j)); symmetric since B is."""
    sums = B.counts.sum(axis=1)
    _require_margins(sums, B.modality_labels)
    values = B.counts / np.sqrt(np.outer(sums, sums).astype(float))
    return CorrectedMatrix(values, "burt_chi2", B.modality_labels, B.modality_labels)


def chi2_correct_disjunctive(D: DisjunctiveTable) -> CorrectedMatrix:
    """d_ij / sqrt(K d_.j); every row sum of D equals K."""
    sums = D.col_sums
    _require_margins(sums, D.modality_labels)
    values = D.entries / np.sqrt(D.n_variables * sums.astype(float))[None, :]
    return CorrectedMatrix(values, "disjunctive_chi2", D.row_labels, D.modality_labels)


def row_profiles(T: ContingencyTable) -> CorrectedMatrix:
    """Row i divided by its total: the conditional distribution of the columns given i."""
    values = T.counts / T.row_sums[:, None].astype(float)
    return CorrectedMatrix(values, "row_profiles", T.row_labels, T.col_labels)


def col_profiles(T: ContingencyTable) -> CorrectedMatrix:
    """Column j divided by its total; column j of ``values`` is the profile c(j)."""
    values = T.counts / T.col_sums[None, :].astype(float)
    return CorrectedMatrix(values, "col_profiles", T.row_labels, T.col_labels)


def partial_winner(
    codes: np.ndarray,
    x: np.ndarray,
    components: slice,
    weights: Optional[np.ndarray] = None,
) -> int:
    """Nearest code on the selected components only; ties go to the lowest unit."""
    part = np.asarray(x, dtype=float)[components]
    distances = sq_distances(np.asarray(codes)[:, components], part[None, :], weights=weights)
    return int(np.argmin(distances[0]))


def _box_codes(rng: Stream, points: Sequence[np.ndarray], n_units: int) -> np.ndarray:
    """Uniform codes inside the bounding box of each block of points, blocks side by side."""
    low = np.concatenate([p.min(axis=0) for p in points])
    high = np.concatenate([p.max(axis=0) for p in points])
    return rng.uniform(low, high, n_units)


def _update(codes: np.ndarray, units: np.ndarray, cols: slice, x: np.ndarray, eps: float) -> None:
    block = codes[units, cols]
    codes[units, cols] = block + eps * (x[cols] - block)


def _unique_labels(rows: Sequence[str], cols: Sequence[str]) -> Tuple[List[str], List[str]]:
    if set(rows) & set(cols):
        return [f"row:{r}" for r in rows], [f"col:{c}" for c in cols]
    return list(rows), list(cols)


class KorrespRows(NamedTuple):
    """The (p + q) x (q + p) augmented table used by KORRESP."""

    rows: np.ndarray
    best_col: np.ndarray
    best_row: np.ndarray
    row_weights: np.ndarray
    col_weights: np.ndarray


def korresp_rows(T: ContingencyTable) -> KorrespRows:
    """First p rows (r(i), c(j(i))), last q rows (r(i(j)), c(j)).

    j(i) is the most probable column given row i and i(j) the most probable
    row given column j, ties going to the lowest index.
    """
    r = row_profiles(T).values
    c = col_profiles(T).values.T
    best_col = np.argmax(r, axis=1)
    best_row = np.argmax(c, axis=1)
    top = np.hstack([r, c[best_col]])
    bottom = np.hstack([r[best_row], c])
    total = float(T.total)
    return KorrespRows(np.vstack([top, bottom]), best_col, best_row, T.row_sums / total, T.col_sums / total)


def korresp_train(
    T: ContingencyTable,
    topo: MapTopology,
    gain: GainSchedule,
    radii: RadiusSchedule,
    seed: int,
    iterations: Optional[int] = None,
    on_step: Optional[StepCallback] = None,
) -> ModalityMap:
    """Kohonen map of the rows and columns of a contingency table.

    Steps alternate strictly. Even steps draw one of the p row entries and
    pick the winner on the first q components under the chi-square metric
    weighted by the column frequencies; odd steps draw one of the q column
    entries and pick the winner on the last p components weighted by the row
    frequencies. Either way the whole code of the winner and its neighbours
    moves toward the drawn entry.
    """
    p, q = T.shape
    if p < 2 or q < 2:
        raise ValidationError(f"korresp needs at least a 2 x 2 table, got {p} x {q}")
    steps = gain.total_iterations if iterations is None else iterations
    gain.require(steps)
    aug = korresp_rows(T)
    first, last = slice(0, q), slice(q, q + p)
    rng = Stream(seed)
    codes = _box_codes(rng, [aug.rows[:, first], aug.rows[:, last]], topo.unit_count)
    masks: Dict[int, np.ndarray] = {}
    for t in range(steps):
        radius = radii.radius_at(t)
        if radius not in masks:
            masks[radius] = neighborhood_mask(topo, radius)
        if t % 2 == 0:
            x = aug.rows[rng.randbelow(p)]
            unit = partial_winner(codes, x, first, aug.col_weights)
        else:
            x = aug.rows[p + rng.randbelow(q)]
            unit = partial_winner(codes, x, last, aug.row_weights)
        _update(codes, np.flatnonzero(masks[radius][unit]), slice(None), x, gain.eps(t))
        if on_step is not None:
            on_step(t, codes.copy())
    rows, cols = _unique_labels(T.row_labels, T.col_labels)
    placement: Dict[str, int] = {}
    for i, label in enumerate(rows):
        placement[label] = partial_winner(codes, aug.rows[i], first, aug.col_weights)
    for j, label in enumerate(cols):
        placement[label] = partial_winner(codes, aug.rows[p + j], last, aug.row_weights)
    logger.info("korresp: %dx%d table on %s, %d steps, seed %d", p, q, topo.spec(), steps, seed)
    return ModalityMap(CodeBook(topo, codes), placement)


def _som_on(
    matrix: CorrectedMatrix,
    topo: MapTopology,
    gain: GainSchedule,
    radii: RadiusSchedule,
    seed: int,
    iterations: Optional[int],
) -> Tuple[CodeBook, DataMatrix]:
    data = matrix.as_data()
    init_seed, train_seed = Stream(seed).spawn_seeds(2)
    codes0 = init_random_box(data, topo, init_seed)
    return som_train(data, codes0, gain, radii, train_seed, iterations=iterations), data


def kacm_train(
    B: BurtTable,
    topo: MapTopology,
    gain: GainSchedule,
    radii: RadiusSchedule,
    seed: int,
    iterations: Optional[int] = None,
) -> ModalityMap:
    """Plain SOM on the corrected Burt table; each modality goes to its row's winner."""
    codebook, data = _som_on(chi2_correct_burt(B), topo, gain, radii, seed, iterations)
    units = assign_all(codebook, data).class_of
    return ModalityMap(codebook, {label: int(u) for label, u in zip(B.modality_labels, units)})


def kacm2_classify_individuals(codes: CodeBook, D: DisjunctiveTable) -> np.ndarray:
    """Individuals as supplementary rows d_ij / K, each sent to its nearest code."""
    if codes.dim != D.n_modalities:
        raise ValidationError(f"codes have {codes.dim} components, table has {D.n_modalities} modalities")
    scaled = D.entries / float(D.n_variables)
    return np.argmin(sq_distances(codes.codes, scaled), axis=1)


def kacm2_train(
    D: DisjunctiveTable,
    B: BurtTable,
    topo: MapTopology,
    gain: GainSchedule,
    radii: RadiusSchedule,
    seed: int,
    iterations: Optional[int] = None,
) -> ModalityMap:
    """Modalities first (KACM), then the individuals as supplementary data."""
    trained = kacm_train(B, topo, gain, radii, seed, iterations)
    individuals = kacm2_classify_individuals(trained.codebook, D)
    return ModalityMap(trained.codebook, trained.modality_units, individuals)


def kacm1_modality_vectors(D: DisjunctiveTable, B: BurtTable) -> np.ndarray:
    """Row j is n_jl / (d_.j sqrt(d_.l) sqrt(K)) for l = 1..M."""
    sums = D.col_sums.astype(float)
    _require_margins(sums, D.modality_labels)
    return B.counts / (sums[:, None] * np.sqrt(sums)[None, :] * np.sqrt(D.n_variables))


def kacm1_train(
    D: DisjunctiveTable,
    B: BurtTable,
    topo: MapTopology,
    gain: GainSchedule,
    radii: RadiusSchedule,
    seed: int,
    iterations: Optional[int] = None,
) -> ModalityMap:
    """Individuals first on the corrected disjunctive table, then modalities as typical individuals."""
    if D.n_modalities != B.counts.shape[0]:
        raise ValidationError("disjunctive and Burt tables disagree on the modalities")
    codebook, data = _som_on(chi2_correct_disjunctive(D), topo, gain, radii, seed, iterations)
    individuals = assign_all(codebook, data).class_of
    vectors = kacm1_modality_vectors(D, B)
    units = np.argmin(sq_distances(codebook.codes, vectors), axis=1)
    placement = {label: int(u) for label, u in zip(D.modality_labels, units)}
    return ModalityMap(codebook, placement, np.array(individuals))


def kdisj_default_iterations(D: DisjunctiveTable) -> int:
    return KDISJ_ITERATIONS_PER_ENTRY * (D.n_modalities + D.n_individuals)


def rarest_modality(D: DisjunctiveTable) -> np.ndarray:
    """For each individual, the least frequent of its modalities (lowest column on ties)."""
    return np.argmax(chi2_correct_disjunctive(D).values, axis=1)


def kdisj_train(
    D: DisjunctiveTable,
    topo: MapTopology,
    gain: GainSchedule,
    radii: RadiusSchedule,
    seed: int,
    iterations: Optional[int] = None,
    on_step: Optional[StepCallback] = None,
) -> ModalityMap:
    """Individuals and modalities on one map, codes of dimension M + N.

    Even steps draw an individual i and present (row i of Dc, column j(i) of
    Dc), j(i) being its rarest modality; the winner is taken on the first M
    components and every component moves. Odd steps draw a modality j and
    present column j of Dc; the winner is taken on the last N components and
    only those move.
    """
    Dc = chi2_correct_disjunctive(D).values
    N, M = Dc.shape
    steps = kdisj_default_iterations(D) if iterations is None else iterations
    gain.require(steps)
    rarest = rarest_modality(D)
    first, last = slice(0, M), slice(M, M + N)
    rng = Stream(seed)
    codes = _box_codes(rng, [Dc, Dc.T], topo.unit_count)
    masks: Dict[int, np.ndarray] = {}
    for t in range(steps):
        radius = radii.radius_at(t)
        if radius not in masks:
            masks[radius] = neighborhood_mask(topo, radius)
        if t % 2 == 0:
            i = rng.randbelow(N)
            x = np.concatenate([Dc[i], Dc[:, rarest[i]]])
            unit = partial_winner(codes, x, first)
            _update(codes, np.flatnonzero(masks[radius][unit]), slice(None), x, gain.eps(t))
        else:
            j = rng.randbelow(M)
            y = np.concatenate([np.zeros(M), Dc[:, j]])
            unit = partial_winner(codes, y, last)
            _update(codes, np.flatnonzero(masks[radius][unit]), last, y, gain.eps(t))
        if on_step is not None:
            on_step(t, codes.copy())
    individuals = np.argmin(sq_distances(codes[:, first], Dc), axis=1)
    modality_units = np.argmin(sq_distances(codes[:, last], Dc.T), axis=1)
    placement = {label: int(u) for label, u in zip(D.modality_labels, modality_units)}
    logger.info("kdisj: %d individuals, %d modalities, %d steps, seed %d", N, M, steps, seed)
    return ModalityMap(CodeBook(topo, codes), placement, individuals)


__all__ = [
    "BurtTable",
    "CORRECTION_KINDS",
    "ContingencyTable",
    "CorrectedMatrix",
    "DisjunctiveTable",
    "KorrespRows",
    "ModalityMap",
    "QualitativeTables",
    "build_tables",
    "chi2_correct_burt",
    "chi2_correct_disjunctive",
    "col_profiles",
    "kacm1_modality_vectors",
    "kacm1_train",
    "kacm2_classify_individuals",
    "kacm2_train",
    "kacm_train",
    "kdisj_default_iterations",
    "kdisj_train",
    "korresp_rows",
    "korresp_train",
    "modality_labels",
    "partial_winner",
    "rarest_modality",
    "row_profiles",
]
