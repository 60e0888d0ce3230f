"""
Scene Extractor
Reads point clouds, posed depth frames, detections and 3D masks from disk
"""

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from scene_io.types import (
    BinaryMask3D, CameraParams, DetectionBox, Frame, FrameSet,
    GroundTruthInstance, LabeledInstance, MaskSource, Scene,
    ScenePointCloud, SuperpointPartition,
)
from utils.errors import (
    DataError, DimensionMismatch, EmptyCloud, HeaderMismatch, IndexOutOfRange,
    MalformedFile, MalformedLine, MissingCameraFile, NonInvertibleExtrinsic,
    UnknownFrame,
)

logger = logging.getLogger(__name__)

# PLY scalar types -> little-endian numpy dtypes
PLY_TYPES = {
    'char': 'i1', 'int8': 'i1',
    'uchar': 'u1', 'uint8': 'u1',
    'short': '<i2', 'int16': '<i2',
    'ushort': '<u2', 'uint16': '<u2',
    'int': '<i4', 'int32': '<i4',
    'uint': '<u4', 'uint32': '<u4',
    'float': '<f4', 'float32': '<f4',
    'double': '<f8', 'float64': '<f8',
}

DEPTH_SUFFIX = ".depth.png"
FRAME_ID_PATTERN = re.compile(r"^(\d+)\.depth\.png$")


# ==============================================================================
# POINT CLOUD
# ==============================================================================

def _read_ply_header(f, path) -> Tuple[str, List[Tuple[str, int, List[Tuple[str, str]], bool]]]:
    """
    Parse a PLY header from an open binary file.

    Returns:
        tuple: (format, elements) where each element is
               (name, count, [(property_name, type)], has_list_property)
    """
    first = f.readline()
    if first.strip() != b'ply':
        raise MalformedFile(f"{path}: missing 'ply' magic line")

    fmt = None
    elements = []
    while True:
        raw = f.readline()
        if not raw:
            raise MalformedFile(f"{path}: header ends before 'end_header'")
        try:
            line = raw.decode('ascii').strip()
        except UnicodeDecodeError:
            raise MalformedFile(f"{path}: PLY header is not ASCII")
        if not line or line.startswith('comment') or line.startswith('obj_info'):
            continue
        tokens = line.split()
        if tokens[0] == 'format':
            if len(tokens) < 2 or tokens[1] not in ('ascii', 'binary_little_endian'):
                raise MalformedFile(f"{path}: unsupported PLY format '{line}'")
            fmt = tokens[1]
        elif tokens[0] == 'element':
            if len(tokens) != 3:
                raise MalformedFile(f"{path}: bad element line '{line}'")
            try:
                count = int(tokens[2])
            except ValueError:
                raise MalformedFile(f"{path}: bad element count '{tokens[2]}'")
            elements.append((tokens[1], count, [], False))
        elif tokens[0] == 'property':
            if not elements:
                raise MalformedFile(f"{path}: property before any element")
            name, count, props, has_list = elements[-1]
            if len(tokens) >= 2 and tokens[1] == 'list':
                elements[-1] = (name, count, props, True)
                continue
            if len(tokens) != 3 or tokens[1] not in PLY_TYPES:
                raise MalformedFile(f"{path}: bad property line '{line}'")
            props.append((tokens[2], tokens[1]))
        elif tokens[0] == 'end_header':
            break
        else:
            raise MalformedFile(f"{path}: unexpected header line '{line}'")

    if fmt is None:
        raise MalformedFile(f"{path}: missing format line")
    return fmt, elements


def load_point_cloud(path) -> ScenePointCloud:
    """
    Load a PLY point cloud (ASCII or binary little-endian).

    Args:
        path (Path): PLY file with at least x/y/z vertex properties

    Returns:
        ScenePointCloud: Points in file order; normals iff nx/ny/nz present
    """
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"Point cloud not found: {path}")

    with open(path, 'rb') as f:
        fmt, elements = _read_ply_header(f, path)

        vertex_position = next((i for i, e in enumerate(elements) if e[0] == 'vertex'), None)
        if vertex_position is None:
            raise MalformedFile(f"{path}: no vertex element")
        _, count, props, has_list = elements[vertex_position]
        names = [p[0] for p in props]
        for axis in ('x', 'y', 'z'):
            if axis not in names:
                raise MalformedFile(f"{path}: vertex element lacks '{axis}'")
        if has_list:
            raise MalformedFile(f"{path}: list properties on vertices are not supported")
        if count == 0:
            raise EmptyCloud(f"{path}: point cloud has 0 vertices")

        preceding = elements[:vertex_position]
        if fmt == 'ascii':
            body = f.read().decode('ascii', errors='replace').splitlines()
            body = [line for line in body if line.strip()]
            skip = sum(e[1] for e in preceding)
            rows = body[skip:skip + count]
            if len(rows) < count:
                raise MalformedFile(f"{path}: expected {count} vertices, found {len(rows)}")
            try:
                table = np.array([row.split()[:len(props)] for row in rows], dtype=np.float64)
            except ValueError:
                raise MalformedFile(f"{path}: non-numeric or short vertex row")
            if table.shape != (count, len(props)):
                raise MalformedFile(f"{path}: vertex rows have the wrong number of values")
            columns = {name: table[:, i] for i, name in enumerate(names)}
        else:
            for name, skip_count, skip_props, skip_list in preceding:
                if skip_list:
                    raise MalformedFile(f"{path}: cannot skip list element '{name}' before vertices")
                skip_dtype = np.dtype([(p, PLY_TYPES[t]) for p, t in skip_props])
                f.seek(skip_dtype.itemsize * skip_count, 1)
            dtype = np.dtype([(p, PLY_TYPES[t]) for p, t in props])
            buffer = f.read(dtype.itemsize * count)
            if len(buffer) < dtype.itemsize * count:
                raise MalformedFile(f"{path}: truncated binary body ({len(buffer)} of {dtype.itemsize * count} bytes)")
            records = np.frombuffer(buffer, dtype=dtype, count=count)
            columns = {name: records[name].astype(np.float64) for name in names}

    points = np.column_stack([columns['x'], columns['y'], columns['z']])
    normals = None
    if all(n in columns for n in ('nx', 'ny', 'nz')):
        normals = np.column_stack([columns['nx'], columns['ny'], columns['nz']])

    cloud = ScenePointCloud(points=points, normals=normals)
    logger.info(f"Loaded {cloud.point_count} points from {path.name} (normals: {cloud.has_normals})")
    return cloud


# ==============================================================================
# FRAMES
# ==============================================================================

def _read_matrix(path: Path) -> np.ndarray:
    """Read a whitespace-separated 4x4 (or 3x3 intrinsic) matrix."""
    try:
        matrix = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except ValueError as e:
        raise MalformedFile(f"{path}: {e}")
    if matrix.shape not in ((4, 4), (3, 3)):
        raise MalformedFile(f"{path}: expected a 4x4 matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise MalformedFile(f"{path}: non-finite matrix entry")
    return matrix


def _read_depth_png(path: Path, depth_scale: float) -> np.ndarray:
    """Read a 16-bit single-channel depth PNG and convert to meters."""
    try:
        with Image.open(path) as image:
            if image.mode not in ('I;16', 'I;16L', 'I;16B', 'I'):
                raise MalformedFile(f"{path}: expected a 16-bit single-channel PNG, got mode {image.mode}")
            raw = np.array(image)
    except OSError as e:
        raise MalformedFile(f"{path}: {e}")
    return raw.astype(np.float64) / depth_scale


def discover_frame_ids(directory) -> List[int]:
    """
    List frame ids present on disk (every `<id>.depth.png`), ascending.

    Args:
        directory (Path): Frame directory

    Returns:
        list: Sorted frame ids
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingCameraFile(f"Frame directory not found: {directory}")
    ids = []
    for entry in directory.iterdir():
        match = FRAME_ID_PATTERN.match(entry.name)
        if match:
            ids.append(int(match.group(1)))
    return sorted(ids)


def _find_frame_file(directory: Path, frame_id: int, suffix: str) -> Optional[Path]:
    """Frame files may be zero-padded; accept any spelling of the id."""
    exact = directory / f"{frame_id}{suffix}"
    if exact.exists():
        return exact
    for candidate in directory.glob(f"*{suffix}"):
        stem = candidate.name[:-len(suffix)]
        if stem.isdigit() and int(stem) == frame_id:
            return candidate
    return None


def load_frame(directory, frame_id: int, depth_scale: float = 1000.0,
               invert_extrinsics: bool = False) -> Frame:
    """
    Load one posed depth frame.

    Args:
        directory (Path): Frame directory
        frame_id (int): Frame id
        depth_scale (float): PNG units per meter
        invert_extrinsics (bool): Files hold camera-to-world poses

    Returns:
        Frame: Camera parameters and depth in meters
    """
    directory = Path(directory)
    depth_path = _find_frame_file(directory, frame_id, DEPTH_SUFFIX)
    intrinsic_path = _find_frame_file(directory, frame_id, ".intrinsic.txt")
    extrinsic_path = _find_frame_file(directory, frame_id, ".extrinsic.txt")
    for path, suffix in ((depth_path, DEPTH_SUFFIX),
                         (intrinsic_path, ".intrinsic.txt"),
                         (extrinsic_path, ".extrinsic.txt")):
        if path is None:
            raise MissingCameraFile(f"Missing camera file: {directory / f'{frame_id}{suffix}'}")

    depth = _read_depth_png(depth_path, depth_scale)
    height, width = depth.shape

    meta_path = _find_frame_file(directory, frame_id, ".meta.txt")
    if meta_path is not None:
        tokens = meta_path.read_text().split()
        try:
            meta_w, meta_h = int(tokens[0]), int(tokens[1])
        except (IndexError, ValueError):
            raise MalformedFile(f"{meta_path}: expected 'W H'")
        if (meta_w, meta_h) != (width, height):
            raise DimensionMismatch(
                f"frame {frame_id}: depth PNG is {width}x{height} but metadata says {meta_w}x{meta_h}"
            )

    intrinsic = _read_matrix(intrinsic_path)
    extrinsic = _read_matrix(extrinsic_path)
    if extrinsic.shape != (4, 4):
        raise MalformedFile(f"{extrinsic_path}: extrinsic must be 4x4")
    if invert_extrinsics:
        try:
            extrinsic = np.linalg.inv(extrinsic)
        except np.linalg.LinAlgError:
            raise NonInvertibleExtrinsic(f"{extrinsic_path}: matrix is singular")

    camera = CameraParams(intrinsic=intrinsic, extrinsic=extrinsic, width=width, height=height)
    return Frame(frame_id=frame_id, camera=camera, depth=depth, image_ref=None)


def select_strided(frame_ids: Sequence[int], stride: int) -> List[int]:
    """Keep every frame whose position in id order is a multiple of stride."""
    if stride < 1:
        raise DataError(f"stride must be >= 1, got {stride}")
    return [fid for position, fid in enumerate(sorted(frame_ids)) if position % stride == 0]


def load_frames(directory, stride: int = 1, depth_scale: float = 1000.0,
                invert_extrinsics: bool = False, max_workers: int = 1) -> FrameSet:
    """
    Load posed depth frames, keeping the first frame of every stride interval.

    Args:
        directory (Path): Directory of `<id>.depth.png`, `<id>.intrinsic.txt`, `<id>.extrinsic.txt`
        stride (int): Frame interval
        depth_scale (float): PNG units per meter
        invert_extrinsics (bool): Files hold camera-to-world poses
        max_workers (int): Parallel file readers

    Returns:
        FrameSet: Frames sorted by id
    """
    directory = Path(directory)
    all_ids = discover_frame_ids(directory)

    # camera files without a depth map are a missing depth file
    for suffix in (".intrinsic.txt", ".extrinsic.txt"):
        for candidate in directory.glob(f"*{suffix}"):
            stem = candidate.name[:-len(suffix)]
            if stem.isdigit() and int(stem) not in all_ids:
                raise MissingCameraFile(f"Missing camera file: {directory / (stem + DEPTH_SUFFIX)}")

    if not all_ids:
        raise MissingCameraFile(f"No '*{DEPTH_SUFFIX}' frames in {directory}")

    selected = select_strided(all_ids, stride)
    logger.info(f"Loading {len(selected)} of {len(all_ids)} frames (stride {stride})")

    def _load(frame_id):
        return load_frame(directory, frame_id, depth_scale, invert_extrinsics)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            frames = list(pool.map(_load, selected))
    else:
        frames = [_load(fid) for fid in selected]

    return FrameSet(frames=tuple(frames))


# ==============================================================================
# DETECTIONS
# ==============================================================================

def load_detections(path) -> List[DetectionBox]:
    """
    Parse a JSON Lines detection file without clipping.

    Args:
        path (Path): One {"frame_id", "box", "class_id", "confidence"} object per line

    Returns:
        list: DetectionBox records in file order
    """
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"Detection file not found: {path}")

    boxes = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedLine(path, line_number, f"invalid JSON ({e.msg})")
            if not isinstance(record, dict):
                raise MalformedLine(path, line_number, "expected a JSON object")
            try:
                frame_id = record['frame_id']
                box = record['box']
                class_id = record['class_id']
                confidence = float(record['confidence'])
            except (KeyError, TypeError, ValueError) as e:
                raise MalformedLine(path, line_number, f"missing or invalid field {e}")
            if not isinstance(frame_id, int) or isinstance(frame_id, bool) or frame_id < 0:
                raise MalformedLine(path, line_number, f"frame_id must be a natural number, got {frame_id!r}")
            if not isinstance(class_id, int) or isinstance(class_id, bool) or class_id < 0:
                raise MalformedLine(path, line_number, f"class_id must be a natural number, got {class_id!r}")
            if not isinstance(box, list) or len(box) != 4:
                raise MalformedLine(path, line_number, "box must be [x_min, y_min, x_max, y_max]")
            try:
                rect = tuple(float(v) for v in box)
            except (TypeError, ValueError):
                raise MalformedLine(path, line_number, "box values must be numbers")
            if not all(np.isfinite(rect)):
                raise MalformedLine(path, line_number, "box values must be finite")
            if not 0.0 <= confidence <= 1.0:
                raise MalformedLine(path, line_number, f"confidence {confidence} outside [0, 1]")
            boxes.append(DetectionBox(frame_id=frame_id, rect=rect, class_id=class_id,
                                      confidence=confidence, order=len(boxes)))

    logger.info(f"Loaded {len(boxes)} detections from {path.name}")
    return boxes


def clip_box(box: DetectionBox, width: int, height: int) -> Optional[DetectionBox]:
    """Clip a box to [0, W] x [0, H]; None if nothing is left."""
    x_min, y_min, x_max, y_max = box.rect
    x_min, x_max = max(0.0, x_min), min(float(width), x_max)
    y_min, y_max = max(0.0, y_min), min(float(height), y_max)
    if x_min >= x_max or y_min >= y_max:
        return None
    return DetectionBox(frame_id=box.frame_id, rect=(x_min, y_min, x_max, y_max),
                        class_id=box.class_id, confidence=box.confidence, order=box.order)


def assign_detections(boxes: Sequence[DetectionBox], frames: FrameSet,
                      known_frame_ids: Optional[Sequence[int]] = None) -> Dict[int, List[DetectionBox]]:
    """
    Clip detections to their frames and group them by frame id.

    Args:
        boxes (list): Raw detections
        frames (FrameSet): Loaded frames
        known_frame_ids (list, optional): Every frame id on disk; detections on
            frames skipped by the stride are discarded, unknown ids raise

    Returns:
        dict: {frame_id: [DetectionBox]} in file order, one key per loaded frame
    """
    by_id = {frame.frame_id: frame for frame in frames}
    known = set(known_frame_ids) if known_frame_ids is not None else set(by_id)
    grouped: Dict[int, List[DetectionBox]] = {fid: [] for fid in by_id}
    dropped = 0
    skipped = 0
    for box in boxes:
        if box.frame_id not in known:
            raise UnknownFrame(f"Detection #{box.order} references unknown frame {box.frame_id}")
        frame = by_id.get(box.frame_id)
        if frame is None:
            skipped += 1
            continue
        clipped = clip_box(box, frame.width, frame.height)
        if clipped is None:
            dropped += 1
            continue
        grouped[box.frame_id].append(clipped)

    if dropped:
        logger.warning(f"Dropped {dropped} detections with no area inside their frame")
    if skipped:
        logger.info(f"Ignored {skipped} detections on frames outside the stride")
    return grouped


# ==============================================================================
# MASKS AND PARTITIONS
# ==============================================================================

def _read_header(lines: List[str], path: Path) -> Tuple[int, int]:
    if not lines:
        raise MalformedFile(f"{path}: empty file")
    tokens = lines[0].split()
    if len(tokens) != 2:
        raise MalformedLine(path, 1, "header must be 'count n_points'")
    try:
        return int(tokens[0]), int(tokens[1])
    except ValueError:
        raise MalformedLine(path, 1, "header values must be integers")


def _parse_indices(tokens: Sequence[str], path: Path, line_number: int, n_points: int) -> BinaryMask3D:
    try:
        indices = np.array([int(t) for t in tokens], dtype=np.int64)
    except ValueError:
        raise MalformedLine(path, line_number, "indices must be integers")
    if indices.size == 0:
        raise MalformedLine(path, line_number, "empty mask")
    if np.any(np.diff(indices) <= 0):
        raise MalformedLine(path, line_number, "indices must be strictly ascending")
    if indices[0] < 0 or indices[-1] >= n_points:
        bad = int(indices[0]) if indices[0] < 0 else int(indices[-1])
        raise IndexOutOfRange(f"{path}:{line_number}: index {bad} outside [0, {n_points})")
    return BinaryMask3D(indices, presorted=True)


def load_masks(path, n_points: int) -> List[BinaryMask3D]:
    """
    Load class-agnostic 3D masks (`n_masks n_points` header, one index list per line).

    Args:
        path (Path): Mask file
        n_points (int): Point count of the scene cloud

    Returns:
        list: BinaryMask3D per line, in file order
    """
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"Mask file not found: {path}")
    lines = [line for line in path.read_text().splitlines()]
    n_masks, declared = _read_header(lines, path)
    if declared != n_points:
        raise HeaderMismatch(f"{path}: header declares {declared} points, cloud has {n_points}")
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n_masks:
        raise MalformedFile(f"{path}: header declares {n_masks} masks, found {len(body)} lines")

    masks = [_parse_indices(line.split(), path, number, n_points)
             for number, line in enumerate(body, start=2)]
    logger.info(f"Loaded {len(masks)} point-based masks from {path.name}")
    return masks


def load_ground_truth(path, n_points: int) -> List[GroundTruthInstance]:
    """
    Load ground-truth instances (`n_instances n_points` header, `class_id idx ...` lines).

    Args:
        path (Path): Ground-truth file
        n_points (int): Point count of the scene cloud

    Returns:
        list: GroundTruthInstance per line
    """
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"Ground-truth file not found: {path}")
    lines = path.read_text().splitlines()
    count, declared = _read_header(lines, path)
    if declared != n_points:
        raise HeaderMismatch(f"{path}: header declares {declared} points, expected {n_points}")
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != count:
        raise MalformedFile(f"{path}: header declares {count} instances, found {len(body)}")

    instances = []
    for number, line in enumerate(body, start=2):
        tokens = line.split()
        try:
            class_id = int(tokens[0])
        except ValueError:
            raise MalformedLine(path, number, "class id must be an integer")
        mask = _parse_indices(tokens[1:], path, number, n_points)
        instances.append(GroundTruthInstance(mask=mask, class_id=class_id))
    return instances


def read_ground_truth_header(path) -> int:
    """Point count declared by a ground-truth file."""
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"Ground-truth file not found: {path}")
    with open(path, 'r') as f:
        first = f.readline()
    return _read_header([first], path)[1]


def load_superpoints(path, n_points: int) -> SuperpointPartition:
    """
    Load a superpoint cache (line i = segment id of point i).

    Args:
        path (Path): Cache file
        n_points (int): Point count of the scene cloud

    Returns:
        SuperpointPartition: Renumbered by ascending minimum member index
    """
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"Superpoint file not found: {path}")
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if len(lines) != n_points:
        raise HeaderMismatch(f"{path}: {len(lines)} labels for {n_points} points")
    labels = np.empty(n_points, dtype=np.int64)
    for number, line in enumerate(lines, start=1):
        try:
            labels[number - 1] = int(line.strip())
        except ValueError:
            raise MalformedLine(path, number, f"segment id must be an integer, got {line.strip()!r}")
    partition = SuperpointPartition.from_labels(labels)
    logger.info(f"Loaded {partition.segment_count} superpoints from {path.name}")
    return partition


def load_vocabulary(path) -> List[str]:
    """Class names, one per line; line index is the class id."""
    path = Path(path)
    return [line.strip() for line in path.read_text(encoding='utf-8').splitlines() if line.strip()]


def load_labeled_instances(path) -> List[LabeledInstance]:
    """
    Read instances written by save_labeled_instances.

    Args:
        path (Path): JSON Lines file, or a directory holding instances.jsonl

    Returns:
        list: LabeledInstance records in file order
    """
    path = Path(path)
    if path.is_dir():
        path = path / "instances.jsonl"
    if not path.exists():
        raise MalformedFile(f"Prediction file not found: {path}")

    instances = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                instances.append(LabeledInstance(
                    mask=BinaryMask3D(record['mask']),
                    class_id=int(record['class_id']),
                    confidence=float(record['confidence']),
                    source=MaskSource(record['source']),
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise MalformedLine(path, line_number, f"bad instance record ({e})")
    return instances


# ==============================================================================
# SCENE ASSEMBLY
# ==============================================================================

def load_scene(scene_dir, config, paths: Optional[Dict[str, str]] = None,
               superpoints_path=None, max_workers: int = 1) -> Scene:
    """
    Load every pipeline input from a scene directory.

    Args:
        scene_dir (Path): Scene directory
        config (PipelineConfig): Frame stride, depth scale, extrinsic convention
        paths (dict, optional): File names from the `paths` section of config.yaml
        superpoints_path (Path, optional): Superpoint cache overriding the scene's own
        max_workers (int): Parallel frame readers

    Returns:
        Scene: Validated inputs
    """
    scene_dir = Path(scene_dir)
    paths = paths or {}
    if not scene_dir.is_dir():
        raise MissingCameraFile(f"Scene directory not found: {scene_dir}")

    cloud = load_point_cloud(scene_dir / paths.get('point_cloud', 'cloud.ply'))

    frames_dir = scene_dir / paths.get('frames', 'frames/')
    frames = load_frames(frames_dir, stride=config.frame_stride, depth_scale=config.depth_scale,
                         invert_extrinsics=config.invert_extrinsics, max_workers=max_workers)
    all_ids = discover_frame_ids(frames_dir)

    raw_boxes = load_detections(scene_dir / paths.get('detections', 'detections.jsonl'))
    detections = assign_detections(raw_boxes, frames, known_frame_ids=all_ids)

    point_masks = load_masks(scene_dir / paths.get('masks', 'masks.txt'), cloud.point_count)

    partition = None
    cache = Path(superpoints_path) if superpoints_path else scene_dir / paths.get('superpoints', 'superpoints.txt')
    if superpoints_path or cache.exists():
        partition = load_superpoints(cache, cloud.point_count)

    vocabulary = None
    vocab_path = scene_dir / paths.get('vocabulary', 'classes.txt')
    if vocab_path.exists():
        vocabulary = load_vocabulary(vocab_path)
        for boxes in detections.values():
            for box in boxes:
                if box.class_id >= len(vocabulary):
                    raise DataError(f"Detection #{box.order} class {box.class_id} outside vocabulary of {len(vocabulary)}")

    scene = Scene(cloud=cloud, frames=frames, detections=detections,
                  point_masks=point_masks, partition=partition, vocabulary=vocabulary)
    logger.info(
        f"Scene loaded: {cloud.point_count} points, {len(frames)} frames, "
        f"{scene.box_count} boxes, {len(point_masks)} point masks"
    )
    return scene
