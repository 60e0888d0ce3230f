"""
Depth Lifting
Backprojects detection-box pixels to world-frame 3D points
"""

import logging
import math
from typing import Tuple

import numpy as np

from scene_io.types import DetectionBox, Frame
from utils.errors import EmptyLift

logger = logging.getLogger(__name__)


def backproject_pixels(frame: Frame, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """
    Map pixels with their depth to world coordinates.

    Args:
        frame (Frame): Camera and depth map
        us (ndarray): Column indices
        vs (ndarray): Row indices (same length)

    Returns:
        ndarray: M x 3 world points
    """
    camera = frame.camera
    depth = frame.depth[vs, us]
    cam = np.empty((len(us), 4))
    cam[:, 0] = (us - camera.cx) * depth / camera.fx
    cam[:, 1] = (vs - camera.cy) * depth / camera.fy
    cam[:, 2] = depth
    cam[:, 3] = 1.0
    world = cam @ camera.camera_to_world.T
    return world[:, :3]


def _strided_span(start: int, stop: int, stride: int) -> np.ndarray:
    span = np.arange(start, stop, stride, dtype=np.int64)
    if span.size and span[-1] != stop - 1:
        span = np.append(span, np.int64(stop - 1))
    return span


def box_pixel_grid(box: DetectionBox, width: int, height: int, pixel_stride: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pixels of a box sampled every pixel_stride, row-major.

    A pixel (u, v) belongs to the box when x_min <= u < x_max and
    y_min <= v < y_max. The last column and row are always sampled so
    the grid reaches every edge of the box.
    """
    x_min, y_min, x_max, y_max = box.rect
    u_start, u_stop = max(0, math.ceil(x_min)), min(width, math.ceil(x_max))
    v_start, v_stop = max(0, math.ceil(y_min)), min(height, math.ceil(y_max))
    columns = _strided_span(u_start, u_stop, pixel_stride)
    rows = _strided_span(v_start, v_stop, pixel_stride)
    vs, us = np.meshgrid(rows, columns, indexing='ij')
    return us.ravel(), vs.ravel()


def lift_box_pixels(box: DetectionBox, frame: Frame, pixel_stride: int = 5) -> np.ndarray:
    """
    Backproject the valid-depth pixels of a detection box.

    Args:
        box (DetectionBox): Box clipped to the frame
        frame (Frame): The box's frame
        pixel_stride (int): Sample every pixel_stride-th pixel in both axes

    Returns:
        ndarray: M x 3 world points in row-major pixel order
    """
    if pixel_stride < 1:
        raise ValueError(f"pixel_stride must be >= 1, got {pixel_stride}")
    us, vs = box_pixel_grid(box, frame.width, frame.height, pixel_stride)
    if us.size:
        valid = frame.depth[vs, us] > 0
        us, vs = us[valid], vs[valid]
    if us.size == 0:
        raise EmptyLift(f"frame {frame.frame_id}: no valid depth inside box #{box.order}")
    return backproject_pixels(frame, us, vs)


def backproject_depth(frame: Frame, pixel_stride: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Backproject every valid pixel of a frame.

    Returns:
        tuple: (pixels M x 2 as (u, v), world points M x 3)
    """
    vs, us = np.mgrid[0:frame.height:pixel_stride, 0:frame.width:pixel_stride]
    us, vs = us.ravel(), vs.ravel()
    valid = frame.depth[vs, us] > 0
    us, vs = us[valid], vs[valid]
    return np.column_stack([us, vs]), backproject_pixels(frame, us, vs)
