"""
Oriented Boxes
PCA-fitted oriented 3D bounding boxes and point containment
"""

import logging
from dataclasses import dataclass

import numpy as np

from scene_io.types import BinaryMask3D, ScenePointCloud

logger = logging.getLogger(__name__)

CONTAINMENT_EPS = 1e-9
SIGN_TIE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class OrientedBox3D:
    """Box with world center, orthonormal axis columns and half extents"""
    center: np.ndarray
    axes: np.ndarray
    half_extents: np.ndarray

    @property
    def volume(self) -> float:
        return float(np.prod(2.0 * self.half_extents))

    def local_coordinates(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - self.center) @ self.axes

    def contains_points(self, points: np.ndarray, eps: float = CONTAINMENT_EPS) -> np.ndarray:
        """Boolean per point: inside the box inflated by eps on every face."""
        local = self.local_coordinates(points)
        return np.all(np.abs(local) <= self.half_extents + eps, axis=1)


def _fix_sign(axis: np.ndarray) -> np.ndarray:
    """Point the axis toward (1, 1, 1); on a tie prefer +x, then +y, then +z."""
    s = axis.sum()
    if s > SIGN_TIE_EPS:
        return axis
    if s < -SIGN_TIE_EPS:
        return -axis
    for component in axis:
        if component > SIGN_TIE_EPS:
            return axis
        if component < -SIGN_TIE_EPS:
            return -axis
    return axis


def fit_oriented_box(points: np.ndarray) -> OrientedBox3D:
    """
    Fit an oriented box to points along their principal axes.

    Axes are the covariance eigenvectors in descending eigenvalue order.
    The first two point toward (1, 1, 1); the third is their cross product,
    so the frame is always right-handed. The box spans the min/max
    projections on each axis.

    Args:
        points (ndarray): M x 3 points, M >= 1

    Returns:
        OrientedBox3D: Box containing every input point
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        raise ValueError("cannot fit a box to zero points")

    mean = points.mean(axis=0)
    centered = points - mean
    covariance = centered.T @ centered / len(points)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues, kind='stable')[::-1]
    axes = eigenvectors[:, order]
    first, second = _fix_sign(axes[:, 0]), _fix_sign(axes[:, 1])
    axes = np.column_stack([first, second, np.cross(first, second)])

    projected = centered @ axes
    low = projected.min(axis=0)
    high = projected.max(axis=0)
    center = mean + axes @ ((low + high) / 2.0)
    half_extents = (high - low) / 2.0
    return OrientedBox3D(center=center, axes=axes, half_extents=half_extents)


def points_in_box_fraction(box: OrientedBox3D, cloud: ScenePointCloud, indices: BinaryMask3D) -> float:
    """
    Fraction of the indexed points that lie inside the box.

    Args:
        box (OrientedBox3D): Box
        cloud (ScenePointCloud): Scene points
        indices (BinaryMask3D): Non-empty subset of points

    Returns:
        float: Value in [0, 1]
    """
    if indices.is_empty:
        raise ValueError("indices must be non-empty")
    inside = box.contains_points(cloud.points[indices.member_indices])
    return int(inside.sum()) / len(indices)
