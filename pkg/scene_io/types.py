"""
Scene Data Types
Immutable records shared by every pipeline stage
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import (
    DimensionMismatch, EmptyCloud, IndexOutOfRange, NonFiniteCoordinate,
    NonInvertibleExtrinsic, DataError,
)

ORTHONORMAL_TOLERANCE = 1e-6
NORMAL_LENGTH_TOLERANCE = 1e-4


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class MaskSource(Enum):
    """Where a 3D mask proposal came from"""
    POINT_BASED = "PointBased"
    RGBD_BASED = "RGBDBased"


@dataclass(frozen=True, eq=False)
class ScenePointCloud:
    """N world-frame points with optional unit normals"""
    points: np.ndarray
    normals: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise DataError(f"points must be N x 3, got shape {points.shape}")
        if len(points) == 0:
            raise EmptyCloud("Point cloud has no points")
        if not np.all(np.isfinite(points)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(points), axis=1))[0])
            raise NonFiniteCoordinate(f"Point {bad} has a non-finite coordinate")
        object.__setattr__(self, 'points', _frozen(points))

        if self.normals is not None:
            normals = np.ascontiguousarray(self.normals, dtype=np.float64)
            if normals.shape != points.shape:
                raise DataError(f"normals shape {normals.shape} does not match points {points.shape}")
            lengths = np.linalg.norm(normals, axis=1)
            if not np.all(np.abs(lengths - 1.0) <= NORMAL_LENGTH_TOLERANCE):
                bad = int(np.flatnonzero(np.abs(lengths - 1.0) > NORMAL_LENGTH_TOLERANCE)[0])
                raise DataError(f"Normal {bad} is not unit length ({lengths[bad]:.6f})")
            object.__setattr__(self, 'normals', _frozen(normals))

    @property
    def point_count(self) -> int:
        return len(self.points)

    @property
    def has_normals(self) -> bool:
        return self.normals is not None


@dataclass(frozen=True, eq=False)
class CameraParams:
    """
    Pinhole camera of one frame.

    intrinsic holds fx, fy, cx, cy in the upper-left 3x3 of a 4x4 matrix;
    extrinsic maps world coordinates to camera coordinates.
    """
    intrinsic: np.ndarray
    extrinsic: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        intrinsic = np.array(self.intrinsic, dtype=np.float64)
        extrinsic = np.array(self.extrinsic, dtype=np.float64)
        if intrinsic.shape == (3, 3):
            padded = np.eye(4)
            padded[:3, :3] = intrinsic
            intrinsic = padded
        if intrinsic.shape != (4, 4) or extrinsic.shape != (4, 4):
            raise DataError("intrinsic and extrinsic must be 4x4 matrices")
        if not (intrinsic[0, 0] > 0 and intrinsic[1, 1] > 0):
            raise DataError(f"focal lengths must be positive, got fx={intrinsic[0, 0]}, fy={intrinsic[1, 1]}")
        if self.width < 1 or self.height < 1:
            raise DimensionMismatch(f"image size must be positive, got {self.width}x{self.height}")
        rotation = extrinsic[:3, :3]
        if not np.allclose(rotation.T @ rotation, np.eye(3), atol=ORTHONORMAL_TOLERANCE, rtol=0):
            raise NonInvertibleExtrinsic("extrinsic rotation block is not orthonormal")
        if abs(np.linalg.det(extrinsic)) < 1e-12:
            raise NonInvertibleExtrinsic("extrinsic matrix is singular")
        object.__setattr__(self, 'intrinsic', _frozen(intrinsic))
        object.__setattr__(self, 'extrinsic', _frozen(extrinsic))
        object.__setattr__(self, 'width', int(self.width))
        object.__setattr__(self, 'height', int(self.height))

    @property
    def fx(self) -> float:
        return float(self.intrinsic[0, 0])

    @property
    def fy(self) -> float:
        return float(self.intrinsic[1, 1])

    @property
    def cx(self) -> float:
        return float(self.intrinsic[0, 2])

    @property
    def cy(self) -> float:
        return float(self.intrinsic[1, 2])

    @property
    def camera_to_world(self) -> np.ndarray:
        """Inverse of the rigid extrinsic."""
        rotation = self.extrinsic[:3, :3]
        translation = self.extrinsic[:3, 3]
        inverse = np.eye(4)
        inverse[:3, :3] = rotation.T
        inverse[:3, 3] = -rotation.T @ translation
        return inverse


@dataclass(frozen=True, eq=False)
class Frame:
    """One posed depth frame; depth is an H x W array in meters, 0 = invalid"""
    frame_id: int
    camera: CameraParams
    depth: np.ndarray
    image_ref: Optional[str] = None

    def __post_init__(self):
        depth = np.ascontiguousarray(self.depth, dtype=np.float64)
        if depth.shape != (self.camera.height, self.camera.width):
            raise DimensionMismatch(
                f"frame {self.frame_id}: depth is {depth.shape[1]}x{depth.shape[0]}, "
                f"camera expects {self.camera.width}x{self.camera.height}"
            )
        if not np.all(np.isfinite(depth)) or np.any(depth < 0):
            raise DataError(f"frame {self.frame_id}: depth values must be finite and >= 0")
        object.__setattr__(self, 'depth', _frozen(depth))

    @property
    def width(self) -> int:
        return self.camera.width

    @property
    def height(self) -> int:
        return self.camera.height


@dataclass(frozen=True)
class FrameSet:
    """Frames ordered by strictly increasing id"""
    frames: Tuple[Frame, ...]

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise DataError("FrameSet must contain at least one frame")
        ids = [f.frame_id for f in frames]
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise DataError(f"frame ids must be strictly increasing, got {ids}")
        object.__setattr__(self, 'frames', frames)

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def __getitem__(self, index: int) -> Frame:
        return self.frames[index]

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def frame_ids(self) -> List[int]:
        return [f.frame_id for f in self.frames]

    def index_of(self, frame_id: int) -> int:
        """Position of a frame id within the set."""
        for i, frame in enumerate(self.frames):
            if frame.frame_id == frame_id:
                return i
        raise KeyError(frame_id)


@dataclass(frozen=True)
class DetectionBox:
    """
    A 2D detector box in pixel coordinates.

    `order` is the position of the box in the detection file, used for
    every deterministic tie-break.
    """
    frame_id: int
    rect: Tuple[float, float, float, float]
    class_id: int
    confidence: float
    order: int = 0

    @property
    def area(self) -> float:
        x_min, y_min, x_max, y_max = self.rect
        return (x_max - x_min) * (y_max - y_min)


class BinaryMask3D:
    """Sorted, unique point indices over a cloud of N points"""

    __slots__ = ('_indices',)

    def __init__(self, indices, n_points: Optional[int] = None, presorted: bool = False):
        array = np.asarray(indices, dtype=np.int64).ravel()
        if not presorted:
            array = np.unique(array)
        if array.size and array[0] < 0:
            raise IndexOutOfRange(f"negative point index {int(array[0])}")
        if n_points is not None and array.size and array[-1] >= n_points:
            raise IndexOutOfRange(f"point index {int(array[-1])} >= point count {n_points}")
        self._indices = _frozen(array)

    @property
    def member_indices(self) -> np.ndarray:
        return self._indices

    def __len__(self) -> int:
        return int(self._indices.size)

    def __iter__(self):
        return iter(self._indices.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask3D):
            return NotImplemented
        return np.array_equal(self._indices, other._indices)

    def __hash__(self) -> int:
        return hash(self._indices.tobytes())

    def __repr__(self) -> str:
        return f"BinaryMask3D(size={len(self)})"

    @property
    def is_empty(self) -> bool:
        return self._indices.size == 0

    @property
    def first_index(self) -> int:
        return int(self._indices[0]) if self._indices.size else -1

    def union(self, other: "BinaryMask3D") -> "BinaryMask3D":
        return BinaryMask3D(np.union1d(self._indices, other._indices), presorted=True)

    def intersection_size(self, other: "BinaryMask3D") -> int:
        return int(np.intersect1d(self._indices, other._indices, assume_unique=True).size)

    def to_list(self) -> List[int]:
        return self._indices.tolist()

    def to_dense(self, n_points: int) -> np.ndarray:
        dense = np.zeros(n_points, dtype=bool)
        dense[self._indices] = True
        return dense


@dataclass(frozen=True)
class LabeledInstance:
    """One labeled output instance"""
    mask: BinaryMask3D
    class_id: int
    confidence: float
    source: MaskSource

    def sort_key(self) -> Tuple[float, int, int]:
        """Confidence descending, then class id, then first member index."""
        return (-self.confidence, self.class_id, self.mask.first_index)


@dataclass(frozen=True)
class GroundTruthInstance:
    """Evaluation target"""
    mask: BinaryMask3D
    class_id: int


@dataclass(frozen=True, eq=False)
class SuperpointPartition:
    """
    Disjoint cover of [0, N) into segments.

    Segment ids are numbered by ascending minimum member index.
    """
    segment_of: np.ndarray
    members: Tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "SuperpointPartition":
        """
        Build a partition from arbitrary per-point labels.

        Args:
            labels (array): Label per point; any integers

        Returns:
            SuperpointPartition: Renumbered so ids follow minimum member index
        """
        labels = np.asarray(labels, dtype=np.int64).ravel()
        if labels.size == 0:
            raise EmptyCloud("Cannot partition zero points")
        # first occurrence of each label, in point order
        _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(first_index, kind='stable')
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        segment_of = rank[inverse.ravel()]
        sort = np.argsort(segment_of, kind='stable')
        bounds = np.searchsorted(segment_of[sort], np.arange(order.size + 1))
        members = tuple(_frozen(sort[bounds[i]:bounds[i + 1]].astype(np.int64)) for i in range(order.size))
        return cls(segment_of=_frozen(segment_of.astype(np.int64)), members=members)

    @property
    def segment_count(self) -> int:
        return len(self.members)

    @property
    def point_count(self) -> int:
        return int(self.segment_of.size)

    def mask_of(self, segment_ids: Sequence[int]) -> BinaryMask3D:
        """Union of the members of the given segments."""
        if len(segment_ids) == 0:
            return BinaryMask3D([], presorted=True)
        return BinaryMask3D(np.concatenate([self.members[s] for s in segment_ids]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SuperpointPartition):
            return NotImplemented
        return np.array_equal(self.segment_of, other.segment_of)


@dataclass(frozen=True)
class Scene:
    """All inputs of one pipeline run"""
    cloud: ScenePointCloud
    frames: FrameSet
    detections: Dict[int, List[DetectionBox]]
    point_masks: List[BinaryMask3D]
    partition: Optional[SuperpointPartition] = None
    vocabulary: Optional[List[str]] = None

    def detections_for(self, frame_id: int) -> List[DetectionBox]:
        return self.detections.get(frame_id, [])

    @property
    def box_count(self) -> int:
        return sum(len(v) for v in self.detections.values())
