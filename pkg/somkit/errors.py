"""Exception hierarchy shared by every somkit module."""

from __future__ import annotations

from typing import Optional


class SomkitError(Exception):
    """Base class for all errors raised by somkit."""


class ValidationError(SomkitError, ValueError):
    """An argument, table or configuration is not acceptable."""


class MissingDataError(ValidationError):
    """Missing values reached an operation that cannot use them."""


class DegenerateDataError(ValidationError):
    """The data has no spread where the computation needs some."""


class ScheduleError(ValidationError):
    """A gain or radius schedule does not cover the requested run."""


class UndefinedStatisticError(SomkitError, ArithmeticError):
    """A statistic is undefined for the given data."""

    def __init__(self, message: str, diagnostic: str = "") -> None:
        super().__init__(message)
        self.diagnostic = diagnostic


class IngestError(ValidationError):
    """A CSV file could not be read into a data matrix."""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ) -> None:
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column!r}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


__all__ = [
    "DegenerateDataError",
    "IngestError",
    "MissingDataError",
    "ScheduleError",
    "SomkitError",
    "UndefinedStatisticError",
    "ValidationError",
]
