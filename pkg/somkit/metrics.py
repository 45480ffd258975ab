"""Quality measures for classifications and maps."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .dataset import DataMatrix, QualitativeColumn
from .errors import DegenerateDataError, UndefinedStatisticError, ValidationError
from .quantize import Assignment, CodeBook, assign_all, sq_distances
from .topology import neighborhood_mask

logger = logging.getLogger(__name__)

Grouping = Union[Assignment, Sequence[int], np.ndarray]


def _labels(grouping: Grouping) -> np.ndarray:
    if isinstance(grouping, Assignment):
        return grouping.class_of
    return np.asarray(grouping, dtype=np.int64)


def _complete_values(data: DataMatrix, operation: str) -> np.ndarray:
    data.require_complete(operation)
    return data.values


def distortion(data: DataMatrix, codebook: CodeBook, assignment: Assignment) -> float:
    """Sum over rows of the squared distance to the code of their class."""
    x = _complete_values(data, "distortion")
    diff = x - codebook.codes[assignment.class_of]
    return float((diff * diff).sum())


def extended_distortion(
    data: DataMatrix,
    codebook: CodeBook,
    r: int,
    assignment: Optional[Assignment] = None,
) -> float:
    """Sum over units i, over k in V_r(i), over x in class k of ||x - C_i||^2."""
    x = _complete_values(data, "extended distortion")
    if assignment is None:
        assignment = assign_all(codebook, data)
    mask = neighborhood_mask(codebook.topo, r)
    distances = sq_distances(codebook.codes, x)
    # member[j, i] is true when row j's class lies in V_r(i)
    member = mask[:, assignment.class_of].T
    return float(distances[member].sum())


def _centroids(x: np.ndarray, labels: np.ndarray, n_groups: int) -> Tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(labels, minlength=n_groups)
    sums = np.zeros((n_groups, x.shape[1]))
    np.add.at(sums, labels, x)
    centroids = np.zeros_like(sums)
    nonempty = counts > 0
    centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
    return centroids, counts


def ss_intra(data: DataMatrix, grouping: Grouping) -> float:
    """Within-class sum of squares about the class centroids."""
    x = _complete_values(data, "ss_intra")
    labels = _labels(grouping)
    n_groups = int(labels.max()) + 1
    centroids, _ = _centroids(x, labels, n_groups)
    diff = x - centroids[labels]
    return float((diff * diff).sum())


@dataclass(frozen=True)
class InertiaDecomposition:
    total: float
    inter: float
    intra: float

    @property
    def explained_pct(self) -> float:
        return 100.0 * self.inter / self.total


def inertia_decomposition(data: DataMatrix, grouping: Grouping) -> InertiaDecomposition:
    """Huygens split of the total inertia into between- and within-group parts."""
    x = _complete_values(data, "inertia")
    labels = _labels(grouping)
    n_groups = int(labels.max()) + 1
    grand = x.mean(axis=0)
    centroids, counts = _centroids(x, labels, n_groups)
    total = float(((x - grand) ** 2).sum())
    inter = float((counts * ((centroids - grand) ** 2).sum(axis=1)).sum())
    intra = ss_intra(data, labels)
    return InertiaDecomposition(total, inter, intra)


def explained_inertia(data: DataMatrix, grouping: Grouping) -> float:
    """Between-group inertia as a percentage of the total inertia."""
    parts = inertia_decomposition(data, grouping)
    if parts.total <= 0.0:
        raise DegenerateDataError("total inertia is zero")
    return float(min(100.0, max(0.0, parts.explained_pct)))


def wilks_lambda(data: DataMatrix, grouping: Grouping) -> float:
    """det(W) / det(T) with W the pooled within-group SSCP and T the total SSCP."""
    x = _complete_values(data, "wilks_lambda")
    labels = _labels(grouping)
    n_groups = int(labels.max()) + 1
    centroids, _ = _centroids(x, labels, n_groups)
    centered = x - x.mean(axis=0)
    total = centered.T @ centered
    within_dev = x - centroids[labels]
    within = within_dev.T @ within_dev
    det_total = float(np.linalg.det(total))
    scale = float(np.prod(np.diag(total))) if np.all(np.diag(total) > 0) else 0.0
    if scale == 0.0 or abs(det_total) <= 1e-12 * scale:
        rank = int(np.linalg.matrix_rank(total))
        raise UndefinedStatisticError(
            "Wilks' lambda is undefined: total scatter matrix is singular",
            diagnostic=f"rank {rank} of {total.shape[0]}; drop collinear or constant columns",
        )
    value = float(np.linalg.det(within)) / det_total
    return float(min(1.0, max(0.0, value)))


def crosstab(labels: Grouping, n_groups: int, qual: QualitativeColumn) -> np.ndarray:
    """Counts of each modality (rows) in each group (columns), missing answers skipped."""
    groups = _labels(labels)
    if groups.shape[0] != qual.codes.shape[0]:
        raise ValidationError("grouping and qualitative column cover different rows")
    keep = qual.codes >= 0
    table = np.zeros((qual.level_count, n_groups), dtype=np.int64)
    np.add.at(table, (qual.codes[keep], groups[keep]), 1)
    return table


def deviations_for_labels(labels: Grouping, n_groups: int, qual: QualitativeColumn) -> np.ndarray:
    """Observed modality counts per group minus n_m n_k / N."""
    observed = crosstab(labels, n_groups, qual).astype(float)
    total = observed.sum()
    if total == 0:
        return observed
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / total
    return observed - expected


def deviations(assignment: Assignment, qual: QualitativeColumn) -> np.ndarray:
    """Modality x unit deviation matrix."""
    return deviations_for_labels(assignment, assignment.unit_count, qual)


@dataclass(frozen=True, eq=False)
class ClassProfiles:
    means: np.ndarray
    stds: np.ndarray
    counts: np.ndarray


def class_profiles(data: DataMatrix, assignment: Assignment) -> ClassProfiles:
    """Mean and population std of every variable inside each class, present entries only."""
    n = assignment.unit_count
    present = data.present.astype(float)
    filled = data.filled()
    counts = np.zeros((n, data.n_cols))
    sums = np.zeros((n, data.n_cols))
    np.add.at(counts, assignment.class_of, present)
    np.add.at(sums, assignment.class_of, filled)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, np.nan)
        dev = np.where(data.present, data.values - means[assignment.class_of], 0.0)
        sq = np.zeros((n, data.n_cols))
        np.add.at(sq, assignment.class_of, dev * dev)
        stds = np.where(counts > 0, np.sqrt(sq / counts), np.nan)
    return ClassProfiles(means, stds, assignment.counts)


@dataclass(frozen=True, eq=False)
class QualityReport:
    distortion: float
    extended_distortion: float
    radius: int
    ss_intra: Optional[float]
    wilks_lambda: Optional[float]
    explained_inertia_pct: Optional[float]
    class_sizes: np.ndarray
    complete_rows_only: bool = False
    notes: List[str] = field(default_factory=list)


def _observed_report(data: DataMatrix, codebook: CodeBook, radius: int) -> QualityReport:
    """Distortions over the present components of every row; the inertia measures stay undefined."""
    assignment = assign_all(codebook, data)
    distances = sq_distances(codebook.codes, data.filled(), data.present)
    own = distances[np.arange(data.n_rows), assignment.class_of]
    member = neighborhood_mask(codebook.topo, radius)[:, assignment.class_of].T
    logger.warning("no complete row: inertia measures are undefined, distortions use present components")
    return QualityReport(
        distortion=float(own.sum()),
        extended_distortion=float(distances[member].sum()),
        radius=radius,
        ss_intra=None,
        wilks_lambda=None,
        explained_inertia_pct=None,
        class_sizes=assignment.counts,
        complete_rows_only=False,
        notes=[
            "no complete row: distortions computed on present components, "
            "SS-intra, Wilks and inertia undefined"
        ],
    )


def quality_report(
    data: DataMatrix,
    codebook: CodeBook,
    radius: int = 1,
) -> QualityReport:
    """All quantitative measures for a trained code book on complete rows.

    Without any complete row only the distortions are reported, over present components.
    """
    notes: List[str] = []
    masked = data.has_missing
    if masked:
        if not data.complete_rows().any():
            return _observed_report(data, codebook, radius)
        data = data.complete()
        notes.append(f"measures computed on the {data.n_rows} complete rows only")
    assignment = assign_all(codebook, data)
    wilks: Optional[float]
    try:
        wilks = wilks_lambda(data, assignment)
    except UndefinedStatisticError as exc:
        wilks = None
        notes.append(f"{exc} ({exc.diagnostic})")
    try:
        inertia = explained_inertia(data, assignment)
    except DegenerateDataError as exc:
        inertia = 0.0
        notes.append(str(exc))
    return QualityReport(
        distortion=distortion(data, codebook, assignment),
        extended_distortion=extended_distortion(data, codebook, radius, assignment),
        radius=radius,
        ss_intra=ss_intra(data, assignment),
        wilks_lambda=wilks,
        explained_inertia_pct=inertia,
        class_sizes=assignment.counts,
        complete_rows_only=masked,
        notes=notes,
    )


__all__ = [
    "ClassProfiles",
    "InertiaDecomposition",
    "QualityReport",
    "class_profiles",
    "crosstab",
    "deviations",
    "deviations_for_labels",
    "distortion",
    "explained_inertia",
    "extended_distortion",
    "inertia_decomposition",
    "quality_report",
    "ss_intra",
    "wilks_lambda",
]
