"""Observation matrices, missing-value masks, qualitative columns and standardization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateDataError, MissingDataError, ValidationError

STANDARDIZE_MODES = ("none", "center", "zscore")


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """N x p table; ``missing[i, j]`` is true when the entry is absent.

    Missing entries are stored as NaN in ``values`` and never imputed.
    """

    values: np.ndarray
    missing: np.ndarray
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        missing = np.array(self.missing, dtype=bool)
        if values.ndim != 2:
            raise ValidationError("data matrix must be two-dimensional")
        n_rows, n_cols = values.shape
        if n_rows < 1 or n_cols < 1:
            raise ValidationError("data matrix needs at least one row and one column")
        if missing.shape != values.shape:
            raise ValidationError("missing mask shape does not match values")
        if len(self.row_labels) != n_rows or len(self.col_labels) != n_cols:
            raise ValidationError("label counts do not match the matrix shape")
        if not np.all(np.isfinite(values[~missing])):
            raise ValidationError("present entries must be finite")
        empty_rows = np.flatnonzero(missing.all(axis=1))
        if empty_rows.size:
            raise MissingDataError(
                f"row {self.row_labels[empty_rows[0]]!r} has no present component"
            )
        empty_cols = np.flatnonzero(missing.all(axis=0))
        if empty_cols.size:
            raise MissingDataError(
                f"column {self.col_labels[empty_cols[0]]!r} is entirely missing"
            )
        values[missing] = np.nan
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "missing", _frozen(missing))
        object.__setattr__(self, "row_labels", tuple(str(x) for x in self.row_labels))
        object.__setattr__(self, "col_labels", tuple(str(x) for x in self.col_labels))

    @classmethod
    def from_array(
        cls,
        values: Sequence,
        missing: Optional[Sequence] = None,
        row_labels: Optional[Sequence[str]] = None,
        col_labels: Optional[Sequence[str]] = None,
    ) -> "DataMatrix":
        """Build from a nested sequence; NaN marks missing when no mask is given."""
        array = np.array(values, dtype=float)
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        mask = np.isnan(array) if missing is None else np.array(missing, dtype=bool)
        rows = row_labels if row_labels is not None else [str(i) for i in range(array.shape[0])]
        cols = col_labels if col_labels is not None else [f"x{j}" for j in range(array.shape[1])]
        return cls(array, mask, tuple(rows), tuple(cols))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def has_missing(self) -> bool:
        return bool(self.missing.any())

    @property
    def present(self) -> np.ndarray:
        return ~self.missing

    def complete_rows(self) -> np.ndarray:
        """Boolean vector, true for rows without any missing entry."""
        return ~self.missing.any(axis=1)

    def subset(self, rows: np.ndarray) -> "DataMatrix":
        index = np.asarray(rows)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        if index.size == 0:
            raise ValidationError("row subset is empty")
        return DataMatrix(
            self.values[index],
            self.missing[index],
            tuple(self.row_labels[i] for i in index),
            self.col_labels,
        )

    def complete(self) -> "DataMatrix":
        """Rows without missing entries only."""
        return self.subset(self.complete_rows())

    def filled(self, fill: float = 0.0) -> np.ndarray:
        """Values with missing entries replaced by ``fill`` (for masked arithmetic)."""
        return np.where(self.missing, fill, self.values)

    def require_complete(self, operation: str) -> None:
        if self.has_missing:
            raise MissingDataError(
                f"{operation} does not accept missing values; use som/scl or --missing exclude"
            )


@dataclass(frozen=True, eq=False)
class QualitativeColumn:
    """One qualitative variable; ``codes[i] == -1`` marks a missing answer."""

    name: str
    level_names: Tuple[str, ...]
    codes: np.ndarray

    def __post_init__(self) -> None:
        codes = np.array(self.codes, dtype=np.int64)
        levels = tuple(str(x) for x in self.level_names)
        if len(levels) < 2:
            raise ValidationError(f"qualitative column {self.name!r} needs at least 2 levels")
        if codes.ndim != 1:
            raise ValidationError("qualitative codes must be one-dimensional")
        if codes.size and (codes.max() >= len(levels) or codes.min() < -1):
            raise ValidationError(f"qualitative column {self.name!r} has codes out of range")
        object.__setattr__(self, "codes", _frozen(codes))
        object.__setattr__(self, "level_names", levels)

    @classmethod
    def from_values(
        cls,
        name: str,
        values: Iterable[Optional[str]],
        levels: Optional[Sequence[str]] = None,
    ) -> "QualitativeColumn":
        """Collect levels in first-appearance order; ``None`` is a missing answer."""
        items = list(values)
        ordered = list(levels) if levels is not None else []
        if levels is None:
            for value in items:
                if value is not None and value not in ordered:
                    ordered.append(value)
        lookup = {level: k for k, level in enumerate(ordered)}
        codes = []
        for value in items:
            if value is None:
                codes.append(-1)
            elif value in lookup:
                codes.append(lookup[value])
            else:
                raise ValidationError(f"value {value!r} is not a level of {name!r}")
        return cls(name, tuple(ordered), np.array(codes, dtype=np.int64))

    @property
    def level_count(self) -> int:
        return len(self.level_names)

    @property
    def missing(self) -> np.ndarray:
        return self.codes < 0

    def counts(self) -> np.ndarray:
        present = self.codes[self.codes >= 0]
        return np.bincount(present, minlength=self.level_count)


@dataclass(frozen=True, eq=False)
class Standardization:
    """Per-column affine transform ``(x - mean) / std``; std is 1 outside zscore."""

    mode: str
    means: np.ndarray
    stds: np.ndarray

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.means) / self.stds

    def invert_values(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.stds + self.means

    def apply(self, data: DataMatrix) -> DataMatrix:
        if data.n_cols != self.means.shape[0]:
            raise ValidationError(
                f"standardization has {self.means.shape[0]} columns, data has {data.n_cols}"
            )
        return DataMatrix(self.apply_values(data.values), data.missing, data.row_labels, data.col_labels)

    def inverse(self, data: DataMatrix) -> DataMatrix:
        return DataMatrix(self.invert_values(data.values), data.missing, data.row_labels, data.col_labels)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "means": [repr(float(x)) for x in self.means],
            "stds": [repr(float(x)) for x in self.stds],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Standardization":
        return cls(
            payload["mode"],
            np.array([float(x) for x in payload["means"]]),
            np.array([float(x) for x in payload["stds"]]),
        )

    @classmethod
    def identity(cls, n_cols: int) -> "Standardization":
        return cls("none", np.zeros(n_cols), np.ones(n_cols))


def column_stats(data: DataMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and population std (1/N) of each column over present entries."""
    present = data.present
    counts = present.sum(axis=0)
    filled = data.filled()
    means = filled.sum(axis=0) / counts
    centered = np.where(present, data.values - means, 0.0)
    stds = np.sqrt((centered ** 2).sum(axis=0) / counts)
    return means, stds


def standardize(data: DataMatrix, mode: str = "none") -> Tuple[DataMatrix, Standardization]:
    """Center or z-score each column over its present entries."""
    if mode not in STANDARDIZE_MODES:
        raise ValidationError(f"unknown standardization {mode!r}")
    if mode == "none":
        return data, Standardization.identity(data.n_cols)
    means, stds = column_stats(data)
    if mode == "center":
        stds = np.ones(data.n_cols)
    else:
        flat = np.flatnonzero(stds <= 0.0)
        if flat.size:
            raise DegenerateDataError(
                f"column {data.col_labels[flat[0]]!r} has zero variance; cannot z-score"
            )
    transform = Standardization(mode, means, stds)
    return transform.apply(data), transform


__all__ = [
    "DataMatrix",
    "QualitativeColumn",
    "STANDARDIZE_MODES",
    "Standardization",
    "column_stats",
    "standardize",
]
