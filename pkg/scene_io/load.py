"""
Output Writers
Writes instances, scenes and reports with validation and atomic replacement
"""

import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from PIL import Image

from scene_io.types import (
    BinaryMask3D, DetectionBox, FrameSet, GroundTruthInstance,
    LabeledInstance, ScenePointCloud, SuperpointPartition,
)
from utils.errors import IoFailure, DataError

logger = logging.getLogger(__name__)


@contextmanager
def atomic_write(path, mode: str = 'w'):
    """
    Write to a temporary sibling file and rename it into place on success.

    A failure inside the block leaves any existing file untouched.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    except OSError as e:
        raise IoFailure(f"Cannot write {path}: {e}")
    encoding = None if 'b' in mode else 'utf-8'
    newline = None if 'b' in mode else '\n'
    try:
        with os.fdopen(fd, mode, encoding=encoding, newline=newline) as f:
            yield f
        os.replace(tmp_name, path)
    except OSError as e:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise IoFailure(f"Cannot write {path}: {e}")
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def validate_instances(instances: Sequence[LabeledInstance], vocabulary_size: Optional[int] = None) -> bool:
    """
    Check output instances before saving.

    Args:
        instances (list): Instances to write
        vocabulary_size (int, optional): Upper bound on class ids

    Returns:
        bool: Validation passed (raises on violations)
    """
    for position, instance in enumerate(instances):
        if instance.mask.is_empty:
            raise DataError(f"instance {position}: empty mask")
        if instance.class_id < 0 or (vocabulary_size is not None and instance.class_id >= vocabulary_size):
            raise DataError(f"instance {position}: class {instance.class_id} outside vocabulary")
        if not 0.0 <= instance.confidence <= 1.0:
            raise DataError(f"instance {position}: confidence {instance.confidence} outside [0, 1]")
    return True


def save_labeled_instances(instances: Sequence[LabeledInstance], path,
                           vocabulary_size: Optional[int] = None) -> Path:
    """
    Save labeled instances as JSON Lines.

    Records are ordered by confidence descending, then class id, then first
    member index, so equal inputs always produce equal bytes.

    Args:
        instances (list): LabeledInstance records
        path (Path): Output file
        vocabulary_size (int, optional): Upper bound on class ids

    Returns:
        Path: The written file
    """
    path = Path(path)
    validate_instances(instances, vocabulary_size)
    ordered = sorted(instances, key=lambda inst: inst.sort_key())

    with atomic_write(path) as f:
        for instance in ordered:
            record = {
                'class_id': instance.class_id,
                'confidence': instance.confidence,
                'source': instance.source.value,
                'mask': instance.mask.to_list(),
            }
            f.write(json.dumps(record, separators=(',', ':')) + "\n")

    logger.info(f"Saved {len(ordered)} instances to {path}")
    return path


def write_json(document: Dict, path) -> Path:
    """Write a JSON document (reports, timing) atomically."""
    path = Path(path)
    with atomic_write(path) as f:
        f.write(json.dumps(document, indent=2, sort_keys=True) + "\n")
    return path


def write_point_cloud(cloud: ScenePointCloud, path, binary: bool = True) -> Path:
    """
    Write a PLY file with float64 coordinates (and normals when present).

    Args:
        cloud (ScenePointCloud): Cloud to write
        path (Path): Output file
        binary (bool): binary_little_endian when True, ASCII otherwise

    Returns:
        Path: The written file
    """
    path = Path(path)
    names = ['x', 'y', 'z']
    columns = [cloud.points]
    if cloud.has_normals:
        names += ['nx', 'ny', 'nz']
        columns.append(cloud.normals)
    table = np.hstack(columns)

    header = ["ply", f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
              f"element vertex {cloud.point_count}"]
    header += [f"property double {name}" for name in names]
    header.append("end_header")
    header_bytes = ("\n".join(header) + "\n").encode('ascii')

    with atomic_write(path, 'wb') as f:
        f.write(header_bytes)
        if binary:
            f.write(np.ascontiguousarray(table, dtype='<f8').tobytes())
        else:
            body = "".join(" ".join(repr(float(v)) for v in row) + "\n" for row in table)
            f.write(body.encode('ascii'))
    return path


def write_matrix(matrix: np.ndarray, path) -> Path:
    """4x4 row-major whitespace-separated matrix with round-trip precision."""
    path = Path(path)
    with atomic_write(path) as f:
        for row in np.asarray(matrix, dtype=np.float64):
            f.write(" ".join(repr(float(v)) for v in row) + "\n")
    return path


def write_depth_png(depth: np.ndarray, path, depth_scale: float = 1000.0) -> Path:
    """Quantize meters to 16-bit PNG units (0 stays invalid)."""
    path = Path(path)
    scaled = np.rint(np.asarray(depth) * depth_scale)
    if np.any(scaled > np.iinfo(np.uint16).max):
        raise DataError(f"{path}: depth exceeds the 16-bit range at scale {depth_scale}")
    with atomic_write(path, 'wb') as f:
        Image.fromarray(scaled.astype(np.uint16)).save(f, format='PNG')
    return path


def write_frames(frames: FrameSet, directory, depth_scale: float = 1000.0,
                 write_meta: bool = True) -> Path:
    """
    Write frames in the loader's layout.

    Args:
        frames (FrameSet): Frames to write
        directory (Path): Frame directory
        depth_scale (float): PNG units per meter
        write_meta (bool): Also write `<id>.meta.txt` with `W H`

    Returns:
        Path: The frame directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        stem = directory / str(frame.frame_id)
        write_depth_png(frame.depth, f"{stem}.depth.png", depth_scale)
        write_matrix(frame.camera.intrinsic, f"{stem}.intrinsic.txt")
        write_matrix(frame.camera.extrinsic, f"{stem}.extrinsic.txt")
        if write_meta:
            with atomic_write(f"{stem}.meta.txt") as f:
                f.write(f"{frame.width} {frame.height}\n")
    logger.info(f"Wrote {len(frames)} frames to {directory}")
    return directory


def write_detections(boxes: Iterable[DetectionBox], path) -> Path:
    """Write detections as JSON Lines in the given order."""
    path = Path(path)
    with atomic_write(path) as f:
        for box in boxes:
            record = {
                'frame_id': box.frame_id,
                'box': [float(v) for v in box.rect],
                'class_id': box.class_id,
                'confidence': box.confidence,
            }
            f.write(json.dumps(record, separators=(',', ':')) + "\n")
    return path


def write_masks(masks: Sequence[BinaryMask3D], n_points: int, path) -> Path:
    """Write masks with the `n_masks n_points` header."""
    path = Path(path)
    with atomic_write(path) as f:
        f.write(f"{len(masks)} {n_points}\n")
        for mask in masks:
            if mask.is_empty:
                raise DataError("Cannot write an empty mask")
            f.write(" ".join(str(i) for i in mask.to_list()) + "\n")
    return path


def write_ground_truth(instances: Sequence[GroundTruthInstance], n_points: int, path) -> Path:
    """Write ground truth as `class_id idx idx ...` lines under a header."""
    path = Path(path)
    with atomic_write(path) as f:
        f.write(f"{len(instances)} {n_points}\n")
        for instance in instances:
            f.write(f"{instance.class_id} " + " ".join(str(i) for i in instance.mask.to_list()) + "\n")
    return path


def save_superpoints(partition: SuperpointPartition, path) -> Path:
    """Write the superpoint cache (line i = segment id of point i)."""
    path = Path(path)
    with atomic_write(path) as f:
        f.write("".join(f"{int(s)}\n" for s in partition.segment_of))
    logger.info(f"Saved {partition.segment_count} superpoints to {path}")
    return path


def write_vocabulary(names: List[str], path) -> Path:
    path = Path(path)
    with atomic_write(path) as f:
        f.write("".join(f"{name}\n" for name in names))
    return path
