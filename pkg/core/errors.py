"""Exception hierarchy shared by the library, the harness and the CLI."""

from __future__ import annotations

from typing import Optional


class LabError(Exception):
    """Base class for every error raised by cobweb-lab."""

    exit_code: int = 1


class UsageError(LabError):
    """Invalid configuration or command-line arguments."""

    exit_code = 2


class DataError(LabError, ValueError):
    """Input data or files that cannot be used as given."""

    exit_code = 3


class DimensionError(DataError):
    """Feature vector length does not match the declared dimensionality."""

    def __init__(self, expected: int, given: int, what: str = "features") -> None:
        super().__init__(f"{what}: expected D={expected}, got D={given}")
        self.expected = expected
        self.given = given


class DataFormatError(DataError):
    """Malformed file contents (bad magic, truncation, misalignment)."""


class ScheduleError(DataError):
    """A class has too few instances for the requested split quota."""


class CheckpointError(DataError):
    """Checkpoint schema or version cannot be loaded."""


class ModelError(LabError):
    """Internal failure of a model computation."""


class UndefinedEntropyError(ModelError):
    """Entropy requested for a concept that has absorbed nothing."""


class TreeStructureError(ModelError):
    """A restructuring operation was asked to do something impossible."""


class GradientError(ModelError):
    """A gradient came out non-finite; the step was rejected."""


class ParameterError(ModelError):
    """Model parameters are non-finite."""


class SplitError(LabError):
    """Failure while processing one split of a protocol run."""

    def __init__(self, split_index: int, cause: Exception, model: Optional[str] = None) -> None:
        where = f"{model} " if model else ""
        super().__init__(f"{where}split D{split_index}: {cause}")
        self.split_index = split_index
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
