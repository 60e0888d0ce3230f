"""
Projection and Visibility
Batch projection of the point cloud into every frame, in-frame and occlusion visibility
"""

import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from scene_io.types import CameraParams, Frame, FrameSet, ScenePointCloud

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProjectedPoints:
    """
    Per-frame pixel coordinates and camera depth of every point (F x N arrays).

    Pixel coordinates are NaN where cam_z <= 0.
    """
    pixel_x: np.ndarray
    pixel_y: np.ndarray
    cam_z: np.ndarray

    @property
    def usable(self) -> np.ndarray:
        return self.cam_z > 0

    @property
    def frame_count(self) -> int:
        return self.cam_z.shape[0]

    @property
    def point_count(self) -> int:
        return self.cam_z.shape[1]


@dataclass(frozen=True, eq=False)
class VisibilityMatrices:
    """In-frame (frame_vis) and depth-consistent (depth_vis) bits, F x N"""
    frame_vis: np.ndarray
    depth_vis: np.ndarray

    @property
    def visible(self) -> np.ndarray:
        return self.frame_vis & self.depth_vis


def round_pixel(values: np.ndarray) -> np.ndarray:
    """Nearest pixel index, halves rounded up."""
    return np.floor(values + 0.5).astype(np.int64)


def project_frame(points: np.ndarray, camera: CameraParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Project world points through one camera.

    Args:
        points (ndarray): N x 3 world points
        camera (CameraParams): Intrinsic and world-to-camera extrinsic

    Returns:
        tuple: (pixel_x, pixel_y, cam_z), each of length N
    """
    homogeneous = np.empty((len(points), 4))
    homogeneous[:, :3] = points
    homogeneous[:, 3] = 1.0
    full = camera.intrinsic @ camera.extrinsic
    projected = homogeneous @ full.T
    cam_z = projected[:, 2]
    usable = cam_z > 0
    pixel_x = np.full(len(points), np.nan)
    pixel_y = np.full(len(points), np.nan)
    np.divide(projected[:, 0], cam_z, out=pixel_x, where=usable)
    np.divide(projected[:, 1], cam_z, out=pixel_y, where=usable)
    return pixel_x, pixel_y, cam_z


def _map(pool: Optional[Executor], fn, items):
    if pool is None:
        return [fn(item) for item in items]
    return list(pool.map(fn, items))


def project_all(cloud: ScenePointCloud, frames: FrameSet, pool: Optional[Executor] = None) -> ProjectedPoints:
    """
    Project the whole cloud into every frame.

    Each frame row is computed independently, so batch and per-frame results
    are bit-identical.

    Args:
        cloud (ScenePointCloud): Scene points
        frames (FrameSet): Posed frames
        pool (Executor, optional): Runs frames concurrently

    Returns:
        ProjectedPoints: F x N pixel coordinates and camera depths
    """
    rows = _map(pool, lambda frame: project_frame(cloud.points, frame.camera), list(frames))
    return ProjectedPoints(
        pixel_x=np.stack([r[0] for r in rows]),
        pixel_y=np.stack([r[1] for r in rows]),
        cam_z=np.stack([r[2] for r in rows]),
    )


def compute_frame_visibility(proj: ProjectedPoints, frames: FrameSet) -> np.ndarray:
    """
    In-frame visibility: 0 < x < W, 0 < y < H and cam_z > 0, all strict.

    Args:
        proj (ProjectedPoints): Output of project_all on the same frames
        frames (FrameSet): Frames providing W and H

    Returns:
        ndarray: F x N boolean matrix
    """
    widths = np.array([f.width for f in frames], dtype=np.float64)[:, None]
    heights = np.array([f.height for f in frames], dtype=np.float64)[:, None]
    with np.errstate(invalid='ignore'):
        inside = (proj.pixel_x > 0) & (proj.pixel_x < widths) & (proj.pixel_y > 0) & (proj.pixel_y < heights)
    return inside & (proj.cam_z > 0)


def sample_depth(frame: Frame, pixel_x: np.ndarray, pixel_y: np.ndarray) -> np.ndarray:
    """Depth at the nearest pixel, clamped to the image."""
    u = np.clip(round_pixel(pixel_x), 0, frame.width - 1)
    v = np.clip(round_pixel(pixel_y), 0, frame.height - 1)
    return frame.depth[v, u]


def _occlusion_row(frame: Frame, pixel_x, pixel_y, cam_z, frame_vis_row, tau_depth) -> np.ndarray:
    row = np.zeros(frame_vis_row.shape, dtype=bool)
    visible = np.flatnonzero(frame_vis_row)
    if visible.size == 0:
        return row
    sampled = sample_depth(frame, pixel_x[visible], pixel_y[visible])
    row[visible] = (sampled > 0) & (np.abs(cam_z[visible] - sampled) < tau_depth)
    return row


def compute_occlusion_visibility(proj: ProjectedPoints, frames: FrameSet, frame_vis: np.ndarray,
                                 tau_depth: float, pool: Optional[Executor] = None) -> np.ndarray:
    """
    Occlusion visibility: projected depth agrees with the depth map within tau_depth.

    Points outside the frame, and points landing on invalid (0) depth, are
    never visible.

    Args:
        proj (ProjectedPoints): Projected points
        frames (FrameSet): Frames with depth maps
        frame_vis (ndarray): F x N in-frame bits
        tau_depth (float): Tolerance in meters
        pool (Executor, optional): Runs frames concurrently

    Returns:
        ndarray: F x N boolean matrix, a subset of frame_vis
    """
    def _row(i):
        return _occlusion_row(frames[i], proj.pixel_x[i], proj.pixel_y[i], proj.cam_z[i], frame_vis[i], tau_depth)

    rows = _map(pool, _row, range(len(frames)))
    return np.stack(rows) if rows else np.zeros_like(frame_vis)


def compute_visibility(cloud: ScenePointCloud, frames: FrameSet, tau_depth: float,
                       pool: Optional[Executor] = None) -> Tuple[ProjectedPoints, VisibilityMatrices]:
    """Projection followed by both visibility matrices."""
    proj = project_all(cloud, frames, pool)
    frame_vis = compute_frame_visibility(proj, frames)
    depth_vis = compute_occlusion_visibility(proj, frames, frame_vis, tau_depth, pool)
    logger.info(
        f"Visibility: {int(frame_vis.sum())} in-frame and {int(depth_vis.sum())} unoccluded "
        f"point observations over {len(frames)} frames"
    )
    return proj, VisibilityMatrices(frame_vis=frame_vis, depth_vis=depth_vis)
