"""Vector quantization on quantitative data: Forgy, SCL, SOM and KBATCH.

Every algorithm finds winners with the squared Euclidean distance restricted
to the present components of the observation. Ties go to the lowest unit
index everywhere.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .dataset import DataMatrix
from .errors import MissingDataError, ScheduleError, ValidationError
from .rng import Stream
from .topology import MapTopology, RadiusSchedule, neighborhood_mask

logger = logging.getLogger(__name__)

GAIN_KINDS = ("constant", "linear", "harmonic")
MISSING_MODES = ("use", "exclude")
CYCLE_WINDOW = 50
_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class CodeBook:
    """n code vectors of dimension p attached to the units of ``topo``."""

    topo: MapTopology
    codes: np.ndarray

    def __post_init__(self) -> None:
        codes = np.array(self.codes, dtype=float)
        if codes.ndim != 2:
            raise ValidationError("codes must be an n x p matrix")
        if codes.shape[0] != self.topo.unit_count:
            raise ValidationError(
                f"{codes.shape[0]} code vectors for a map of {self.topo.unit_count} units"
            )
        if not np.all(np.isfinite(codes)):
            raise ValidationError("code vectors must be finite")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @property
    def unit_count(self) -> int:
        return self.codes.shape[0]

    @property
    def dim(self) -> int:
        return self.codes.shape[1]

    def with_codes(self, codes: np.ndarray) -> "CodeBook":
        return CodeBook(self.topo, codes)


@dataclass(frozen=True)
class GainSchedule:
    """Adaptation gain eps(t) for t in [0, total_iterations).

    ``harmonic`` is eps0 / (1 + t (eps0/eps_final - 1) / T), which decays like
    1/t and so satisfies the Robbins-Monro conditions asymptotically.
    """

    kind: str
    eps0: float
    eps_final: float = 0.0
    total_iterations: int = 1

    def __post_init__(self) -> None:
        if self.kind not in GAIN_KINDS:
            raise ScheduleError(f"unknown gain schedule {self.kind!r}")
        if self.total_iterations < 1:
            raise ScheduleError("gain schedule needs at least one iteration")
        if not 0.0 <= self.eps0 <= 1.0:
            raise ScheduleError(f"eps0 must lie in [0, 1], got {self.eps0}")
        if self.kind == "constant":
            return
        if self.eps0 <= 0.0:
            raise ScheduleError("decreasing schedules need eps0 > 0")
        if not 0.0 <= self.eps_final <= self.eps0:
            raise ScheduleError("eps_final must lie in [0, eps0]")
        if self.kind == "harmonic" and self.eps_final <= 0.0:
            raise ScheduleError("harmonic schedule needs eps_final > 0")

    def eps(self, t: int) -> float:
        if self.kind == "constant":
            return self.eps0
        T = self.total_iterations
        if self.kind == "linear":
            return self.eps0 + (self.eps_final - self.eps0) * t / T
        return self.eps0 / (1.0 + t * (self.eps0 / self.eps_final - 1.0) / T)

    def require(self, iterations: int) -> None:
        if iterations > self.total_iterations:
            raise ScheduleError(
                f"gain schedule covers {self.total_iterations} iterations, run needs {iterations}"
            )


@dataclass(frozen=True, eq=False)
class Assignment:
    """Voronoi classes: ``class_of[i]`` is the unit of row i."""

    class_of: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_classes(cls, class_of: Sequence[int], unit_count: int) -> "Assignment":
        labels = np.asarray(class_of, dtype=np.int64)
        if labels.size and (labels.min() < 0 or labels.max() >= unit_count):
            raise ValidationError("class index out of range")
        counts = np.bincount(labels, minlength=unit_count)
        labels.setflags(write=False)
        counts.setflags(write=False)
        return cls(labels, counts)

    @property
    def unit_count(self) -> int:
        return self.counts.shape[0]


class ForgyResult(NamedTuple):
    codebook: CodeBook
    assignment: Assignment
    iterations: int


@dataclass(frozen=True, eq=False)
class KBatchResult:
    """``radii_used[k]`` is the radius of sweep k + 1."""

    codebook: CodeBook
    converged: bool
    assignment: Assignment
    iterations: int
    radius: int
    radii_used: Tuple[int, ...] = ()


BatchCallback = Callable[[int, CodeBook, Assignment], None]
StepCallback = Callable[[int, np.ndarray], None]


def sq_distances(
    codes: np.ndarray,
    x: np.ndarray,
    present: Optional[np.ndarray] = None,
    weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Squared distances from each row of ``x`` (m x p) to every code (n x p).

    Only components flagged in ``present`` count; ``weights`` divides each
    squared difference (chi-square metric).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if present is None:
        present = np.ones_like(x, dtype=bool)
    present = np.atleast_2d(present)
    out = np.empty((x.shape[0], codes.shape[0]))
    for start in range(0, x.shape[0], _CHUNK):
        stop = start + _CHUNK
        diff = np.where(present[start:stop, None, :], x[start:stop, None, :] - codes[None, :, :], 0.0)
        squared = diff * diff
        if weights is not None:
            squared = squared / weights
        out[start:stop] = squared.sum(axis=2)
    return out


def _winner_index(codes: np.ndarray, x: np.ndarray, present: np.ndarray, weights=None) -> int:
    return int(np.argmin(sq_distances(codes, x[None, :], present[None, :], weights)[0]))


def winner(codebook: CodeBook, x: Sequence[float], missing: Optional[Sequence[bool]] = None) -> int:
    """Unit whose code is nearest to ``x`` over the present components."""
    x = np.asarray(x, dtype=float)
    if x.shape != (codebook.dim,):
        raise ValidationError(f"observation has {x.shape[-1]} components, codes have {codebook.dim}")
    mask = np.isnan(x) if missing is None else np.asarray(missing, dtype=bool)
    present = ~mask
    if not present.any():
        raise MissingDataError("observation has no present component")
    return _winner_index(codebook.codes, np.where(present, x, 0.0), present)


def assign_all(codebook: CodeBook, data: DataMatrix) -> Assignment:
    """Nearest-code class of every row (restricted distance on masked rows)."""
    if data.n_cols != codebook.dim:
        raise ValidationError(f"data has {data.n_cols} columns, codes have {codebook.dim}")
    distances = sq_distances(codebook.codes, data.filled(), data.present)
    return Assignment.from_classes(np.argmin(distances, axis=1), codebook.unit_count)


def _batch_sweeps(
    data: DataMatrix,
    codes0: CodeBook,
    radii: RadiusSchedule,
    max_iters: int,
    on_step: Optional[BatchCallback],
    detect_cycles: bool,
):
    """Batch sweeps along ``radii``.

    ``t`` is the position in the radius schedule. It advances by one per
    sweep, and jumps to the next threshold once the assignment is stable at
    the current radius. Convergence is a stable assignment at the final radius.
    """
    values = data.values
    topo = codes0.topo
    codebook = codes0
    assignment = assign_all(codebook, data)
    seen = deque(maxlen=CYCLE_WINDOW)
    seen.append(assignment.class_of.tobytes())
    converged = False
    iteration = 0
    t = 0
    radius = radii.radius_at(0)
    radii_used: List[int] = []
    for iteration in range(1, max_iters + 1):
        previous = radius
        radius = radii.radius_at(t)
        if radius != previous:
            seen.clear()
        radii_used.append(radius)
        mask = neighborhood_mask(topo, radius).astype(float)
        onehot = np.zeros((values.shape[0], topo.unit_count))
        onehot[np.arange(values.shape[0]), assignment.class_of] = 1.0
        sums = onehot.T @ values
        counts = assignment.counts.astype(float)
        union_sums = mask @ sums
        union_counts = mask @ counts
        codes = np.array(codebook.codes)
        filled = union_counts > 0
        codes[filled] = union_sums[filled] / union_counts[filled, None]
        if not filled.all():
            logger.warning("sweep %d: %d units with empty neighbourhood kept", iteration, int((~filled).sum()))
        codebook = codebook.with_codes(codes)
        new_assignment = assign_all(codebook, data)
        if on_step is not None:
            on_step(iteration, codebook, new_assignment)
        moved = int((new_assignment.class_of != assignment.class_of).sum())
        logger.debug("sweep %d at radius %d: %d rows changed class", iteration, radius, moved)
        assignment = new_assignment
        if moved == 0:
            following = radii.next_change(t)
            if following is None:
                converged = True
                break
            t = following
            continue
        key = assignment.class_of.tobytes()
        if detect_cycles and key in seen and radii.next_change(t) is None:
            logger.warning("batch sweeps entered a cycle at sweep %d", iteration)
            break
        seen.append(key)
        t += 1
    return codebook, assignment, iteration, converged, radius, tuple(radii_used)


def forgy(
    data: DataMatrix,
    codes0: CodeBook,
    max_iters: int = 100,
    on_step: Optional[BatchCallback] = None,
) -> ForgyResult:
    """Moving-centres algorithm: alternate nearest-code assignment and centroids.

    Empty classes keep their previous code. Stops when the assignment no
    longer changes or after ``max_iters`` sweeps.
    """
    data.require_complete("forgy")
    _check_dims(data, codes0)
    if codes0.unit_count > data.n_rows:
        logger.warning("forgy: %d classes for %d rows", codes0.unit_count, data.n_rows)
    codebook, assignment, iterations, _, _, _ = _batch_sweeps(
        data, codes0, RadiusSchedule.constant(0), max_iters, on_step, detect_cycles=False
    )
    return ForgyResult(codebook, assignment, iterations)


def kbatch_train(
    data: DataMatrix,
    codes0: CodeBook,
    radii: RadiusSchedule,
    max_iters: int = 200,
    on_step: Optional[BatchCallback] = None,
) -> KBatchResult:
    """Batch Kohonen: each code becomes the centroid of its neighbourhood's classes.

    The radius follows ``radii`` indexed by sweep, moving on to the next
    radius early when the assignment is already stable. Convergence means an
    unchanged assignment at the final radius; a repeated assignment within
    the last sweeps at that radius is reported as a cycle.
    """
    data.require_complete("kbatch")
    _check_dims(data, codes0)
    codebook, assignment, iterations, converged, radius, radii_used = _batch_sweeps(
        data, codes0, radii, max_iters, on_step, detect_cycles=True
    )
    logger.info("kbatch: %d sweeps, converged=%s, final radius %d", iterations, converged, radius)
    return KBatchResult(codebook, converged, assignment, iterations, radius, radii_used)


def _check_dims(data: DataMatrix, codebook: CodeBook) -> None:
    if data.n_cols != codebook.dim:
        raise ValidationError(f"data has {data.n_cols} columns, codes have {codebook.dim}")


def som_train(
    data: DataMatrix,
    codes0: CodeBook,
    gain: GainSchedule,
    radii: RadiusSchedule,
    seed: int,
    missing_mode: str = "use",
    iterations: Optional[int] = None,
    on_step: Optional[StepCallback] = None,
) -> CodeBook:
    """Stochastic Kohonen algorithm with 0/1 neighbourhood weighting.

    Each iteration draws a row uniformly, finds its winner on the present
    components and moves the winner and its V_r neighbours by eps(t) toward
    the row, on the present components only. With ``missing_mode="exclude"``
    only complete rows are drawn.
    """
    if missing_mode not in MISSING_MODES:
        raise ValidationError(f"unknown missing mode {missing_mode!r}")
    _check_dims(data, codes0)
    T = gain.total_iterations if iterations is None else iterations
    gain.require(T)
    pool = np.arange(data.n_rows)
    if missing_mode == "exclude":
        pool = np.flatnonzero(data.complete_rows())
        if pool.size == 0:
            raise MissingDataError("no complete row to train on")
        if pool.size < data.n_rows:
            logger.warning("som: %d incomplete rows excluded from training", data.n_rows - pool.size)
    values = data.filled()
    present = data.present
    topo = codes0.topo
    codes = np.array(codes0.codes)
    rng = Stream(seed)
    masks = {}
    for t in range(T):
        row = pool[rng.randbelow(pool.size)]
        x = values[row]
        keep = present[row]
        unit = _winner_index(codes, x, keep)
        radius = radii.radius_at(t)
        if radius not in masks:
            masks[radius] = neighborhood_mask(topo, radius)
        units = np.flatnonzero(masks[radius][unit])
        cols = np.flatnonzero(keep)
        block = codes[np.ix_(units, cols)]
        codes[np.ix_(units, cols)] = block + gain.eps(t) * (x[cols] - block)
        if on_step is not None:
            on_step(t, codes.copy())
    return codes0.with_codes(codes)


def scl_train(
    data: DataMatrix,
    codes0: CodeBook,
    gain: GainSchedule,
    seed: int,
    iterations: Optional[int] = None,
    on_step: Optional[StepCallback] = None,
) -> CodeBook:
    """Simple competitive learning: the stochastic update moves the winner only."""
    return som_train(
        data,
        codes0,
        gain,
        RadiusSchedule.constant(0),
        seed,
        missing_mode="use",
        iterations=iterations,
        on_step=on_step,
    )


__all__ = [
    "Assignment",
    "CodeBook",
    "ForgyResult",
    "GAIN_KINDS",
    "GainSchedule",
    "KBatchResult",
    "MISSING_MODES",
    "assign_all",
    "forgy",
    "kbatch_train",
    "scl_train",
    "som_train",
    "sq_distances",
    "winner",
]
