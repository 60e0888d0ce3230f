"""
Error Types
One exception hierarchy for every stage of the box-fusion pipeline.

The CLI maps UsageError to exit code 1 and DataError (and subclasses) to
exit code 2.
"""

from typing import Optional


class BoxFusionError(Exception):
    """Base class for all pipeline errors."""


class UsageError(BoxFusionError):
    """Bad command-line usage (unknown flag, malformed value)."""


class DataError(BoxFusionError):
    """Input data is missing, malformed or inconsistent."""


class InvalidConfig(DataError):
    """A configuration value is out of its allowed range."""


class MalformedFile(DataError):
    """File header or body could not be parsed."""


class EmptyCloud(DataError):
    """Point cloud declares zero vertices."""


class NonFiniteCoordinate(DataError):
    """Point cloud contains NaN or infinite coordinates."""


class MissingCameraFile(DataError):
    """A frame is missing its depth, intrinsic or extrinsic file."""


class DimensionMismatch(DataError):
    """Depth map size disagrees with the frame metadata."""


class NonInvertibleExtrinsic(DataError):
    """Extrinsic matrix is singular or its rotation block is not orthonormal."""


class MalformedLine(DataError):
    """A line in a line-oriented file could not be parsed."""

    def __init__(self, path, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {reason}")


class UnknownFrame(DataError):
    """A detection references a frame id that does not exist."""


class IndexOutOfRange(DataError):
    """A mask references a point index outside [0, N)."""


class HeaderMismatch(DataError):
    """Declared point count in a file disagrees with the cloud."""


class EmptyLift(DataError):
    """No pixel inside a detection box has valid depth."""


class InfeasiblePlacement(DataError):
    """Synthetic objects could not be placed without overlap."""


class IoFailure(DataError):
    """Writing an output file failed."""


class StageError(DataError):
    """A module error re-raised with the pipeline stage that produced it."""

    def __init__(self, stage: str, cause: Optional[BaseException] = None):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
