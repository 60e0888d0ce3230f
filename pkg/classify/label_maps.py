"""
Label Maps
Per-frame class images painted from detector boxes, largest box first
"""

import logging
import math
from concurrent.futures import Executor
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from scene_io.load import atomic_write
from scene_io.types import DetectionBox, Frame, FrameSet

logger = logging.getLogger(__name__)

NO_LABEL = -1


def pixel_rect(box: DetectionBox, width: int, height: int) -> Tuple[int, int, int, int]:
    """
    Integer pixel span of a box as (u0, v0, u1, v1), end-exclusive.

    Corners are rounded to the nearest pixel and clipped to the image.
    """
    x_min, y_min, x_max, y_max = box.rect
    u0, u1 = math.floor(x_min + 0.5), math.floor(x_max + 0.5)
    v0, v1 = math.floor(y_min + 0.5), math.floor(y_max + 0.5)
    return max(0, u0), max(0, v0), min(width, u1), min(height, v1)


def painted_area(box: DetectionBox, width: int, height: int) -> int:
    """Number of pixels the box covers once rounded and clipped."""
    u0, v0, u1, v1 = pixel_rect(box, width, height)
    return max(0, u1 - u0) * max(0, v1 - v0)


def painting_order(boxes: Sequence[DetectionBox], width: int, height: int) -> List[DetectionBox]:
    """Painted area descending; equal areas keep file order so the later box paints last."""
    return sorted(boxes, key=lambda b: (-painted_area(b, width, height), b.order))


def paint_label_map(boxes: Sequence[DetectionBox], width: int, height: int) -> np.ndarray:
    """
    Paint one frame's boxes into an H x W label image.

    Args:
        boxes (list): Boxes clipped to the frame
        width (int): Image width
        height (int): Image height

    Returns:
        ndarray: int64 labels, -1 where no box covers the pixel
    """
    labels = np.full((height, width), NO_LABEL, dtype=np.int64)
    for box in painting_order(boxes, width, height):
        u0, v0, u1, v1 = pixel_rect(box, width, height)
        if u1 > u0 and v1 > v0:
            labels[v0:v1, u0:u1] = box.class_id
    return labels


def build_label_maps(detections: Mapping[int, Sequence[DetectionBox]], frames: FrameSet,
                     pool: Optional[Executor] = None) -> Dict[int, np.ndarray]:
    """
    Build a label map for every frame.

    Args:
        detections (dict): frame_id -> boxes
        frames (FrameSet): Frames giving image sizes
        pool (Executor, optional): Paints frames concurrently

    Returns:
        dict: frame_id -> H x W label image
    """
    def _paint(frame: Frame) -> np.ndarray:
        return paint_label_map(detections.get(frame.frame_id, []), frame.width, frame.height)

    frame_list = list(frames)
    maps = list(pool.map(_paint, frame_list)) if pool is not None else [_paint(f) for f in frame_list]
    labeled = sum(int((m >= 0).sum()) for m in maps)
    logger.info(f"Built {len(maps)} label maps ({labeled} labeled pixels)")
    return {frame.frame_id: m for frame, m in zip(frame_list, maps)}


def save_label_maps(label_maps: Mapping[int, np.ndarray], directory) -> Path:
    """Write `<frame_id>.labels.png` as 16-bit images holding class_id + 1."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for frame_id in sorted(label_maps):
        encoded = (label_maps[frame_id] + 1).astype(np.uint16)
        with atomic_write(directory / f"{frame_id}.labels.png", 'wb') as f:
            Image.fromarray(encoded).save(f, format='PNG')
    logger.info(f"Wrote {len(label_maps)} label maps to {directory}")
    return directory
