"""Initial code books: inside the data box (I), from observations (II), PCA mesh (III)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .dataset import DataMatrix
from .errors import DegenerateDataError, ValidationError
from .quantize import CodeBook
from .rng import Stream
from .topology import MapTopology

logger = logging.getLogger(__name__)

INIT_METHODS = ("I", "II", "III")
JACOBI_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PcaResult:
    """First principal plane of the complete rows."""

    mean: np.ndarray
    component_directions: np.ndarray
    explained_variance: np.ndarray
    projection: np.ndarray


def jacobi_eigh(matrix: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in non-increasing order (stable, so ties keep axis
    order) and eigenvectors as columns, each signed so that its
    largest-magnitude coordinate is positive.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("jacobi_eigh needs a square matrix")
    p = a.shape[0]
    v = np.eye(p)
    scale = max(np.abs(a).max(), 1.0)
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a))).max() if p > 1 else 0.0
        if off <= tol * scale:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                if abs(a[i, j]) <= tol * scale * 1e-3:
                    continue
                theta = 0.5 * np.arctan2(2.0 * a[i, j], a[j, j] - a[i, i])
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(p)
                rot[i, i] = c
                rot[j, j] = c
                rot[i, j] = s
                rot[j, i] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order]
    for k in range(p):
        lead = int(np.argmax(np.abs(vectors[:, k])))
        if vectors[lead, k] < 0:
            vectors[:, k] = -vectors[:, k]
    return eigenvalues, vectors


def principal_plane(data: DataMatrix, components: int = 2) -> PcaResult:
    """PCA of the complete rows, population covariance, first ``components`` axes."""
    complete = data.complete()
    x = complete.values
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / x.shape[0]
    if np.trace(cov) <= 0.0:
        raise DegenerateDataError("data has zero total variance; no principal plane")
    eigenvalues, vectors = jacobi_eigh(cov)
    k = min(components, data.n_cols)
    directions = vectors[:, :k].T
    variances = np.clip(eigenvalues[:k], 0.0, None)
    return PcaResult(mean, directions, variances, centered @ directions.T)


def init_random_box(data: DataMatrix, topo: MapTopology, seed: int) -> CodeBook:
    """Codes drawn uniformly inside the per-column [min, max] box of present values."""
    low = np.nanmin(data.values, axis=0)
    high = np.nanmax(data.values, axis=0)
    codes = Stream(seed).uniform(low, high, topo.unit_count)
    return CodeBook(topo, codes)


def init_from_observations(data: DataMatrix, topo: MapTopology, seed: int) -> CodeBook:
    """n distinct complete rows drawn without replacement."""
    pool = np.flatnonzero(data.complete_rows())
    n = topo.unit_count
    if pool.size < n:
        raise ValidationError(
            f"initialization II needs {n} complete rows, data has {pool.size}"
        )
    picked = Stream(seed).sample(pool.size, n)
    return CodeBook(topo, data.values[pool[picked]])


def _axis(low: float, high: float, count: int) -> np.ndarray:
    if count == 1:
        return np.array([(low + high) / 2.0])
    return np.linspace(low, high, count)


def init_pca_mesh(data: DataMatrix, topo: MapTopology) -> CodeBook:
    """Regular mesh over the bounding rectangle of the projections on the first plane.

    Columns run along the first axis and rows along the second; a string runs
    along the first axis only. Odd rows of a hexgrid are shifted by half a
    step, the mesh staying inside the rectangle.
    """
    two_d = topo.kind != "string" and topo.rows > 1 and topo.cols > 1
    if two_d and data.n_cols < 2:
        raise ValidationError("initialization III on a 2-D map needs at least 2 columns")
    pca = principal_plane(data, components=2 if two_d else 1)
    proj = pca.projection
    u_low, u_high = proj[:, 0].min(), proj[:, 0].max()
    if not two_d:
        length = topo.unit_count
        u = _axis(u_low, u_high, length)
        codes = pca.mean + u[:, None] * pca.component_directions[0]
        return CodeBook(topo, codes)
    v_low, v_high = proj[:, 1].min(), proj[:, 1].max()
    cols = topo.cols
    if topo.kind == "hexgrid" and cols > 1:
        half = (u_high - u_low) / (2 * cols - 1)
        even_u = _axis(u_low, u_high - half, cols)
        odd_u = even_u + half
    else:
        even_u = odd_u = _axis(u_low, u_high, cols)
    v = _axis(v_low, v_high, topo.rows)
    codes = np.empty((topo.unit_count, data.n_cols))
    for row in range(topo.rows):
        u = odd_u if row % 2 else even_u
        for col in range(cols):
            codes[row * cols + col] = (
                pca.mean + u[col] * pca.component_directions[0] + v[row] * pca.component_directions[1]
            )
    logger.debug("pca mesh: explained variance %s", pca.explained_variance)
    return CodeBook(topo, codes)


def initialize(method: str, data: DataMatrix, topo: MapTopology, seed: int) -> CodeBook:
    if method == "I":
        return init_random_box(data, topo, seed)
    if method == "II":
        return init_from_observations(data, topo, seed)
    if method == "III":
        return init_pca_mesh(data, topo)
    raise ValidationError(f"unknown initialization {method!r}; expected I, II or III")


__all__ = [
    "INIT_METHODS",
    "PcaResult",
    "init_from_observations",
    "init_pca_mesh",
    "init_random_box",
    "initialize",
    "jacobi_eigh",
    "principal_plane",
]
