"""
Synthetic Scenes
Seeded RGB-D scenes of cuboids and ellipsoids with analytic depth, ideal boxes and ground truth
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from scene_io.load import (
    write_detections, write_frames, write_ground_truth, write_masks,
    write_point_cloud, write_vocabulary,
)
from scene_io.types import (
    BinaryMask3D, CameraParams, DetectionBox, Frame, FrameSet,
    GroundTruthInstance, Scene, ScenePointCloud,
)
from scene_io.extract_scene import select_strided
from utils.errors import InfeasiblePlacement, InvalidConfig

logger = logging.getLogger(__name__)

CLASS_NAMES = [
    "small cuboid", "medium cuboid", "large cuboid",
    "small ellipsoid", "medium ellipsoid", "large ellipsoid",
]

# half-extent ranges per size bucket, meters
SIZE_BUCKETS = [(0.12, 0.15), (0.16, 0.19), (0.20, 0.23)]
MAX_OBJECT_HEIGHT = 2.0 * SIZE_BUCKETS[-1][1]

# clearance between footprint circles, well above the k-NN reach at the default spacing
PLACEMENT_GAP = 0.35
PLACEMENT_DISC = 0.35
LAYOUT_ATTEMPTS = 10

ORBIT_MARGIN_PIXELS = 8.0
ORBIT_DISTANCE_STEP = 0.05
ORBIT_SEARCH_STEPS = 4000
ORBIT_TARGET = np.zeros(3)
MIN_DETECTION_PIXELS = 20
UP = np.array([0.0, 0.0, 1.0])


# ============================================================================
# CONFIGURATION AND TYPES
# ============================================================================

@dataclass(frozen=True)
class SyntheticConfig:
    """Generator parameters"""
    objects_min: int = 5
    objects_max: int = 10
    frames: int = 30
    width: int = 320
    height: int = 240
    room_extent: float = 6.0
    point_spacing: float = 0.04
    withhold_fraction: float = 0.0
    jitter: float = 0.0
    max_placement_retries: int = 200
    fov_degrees: float = 70.0
    camera_elevation: float = 80.0
    seed: int = 0

    @classmethod
    def from_app_config(cls, app_config: Mapping[str, Any], **overrides) -> "SyntheticConfig":
        """Defaults from the `synthetic` section of config.yaml, then keyword overrides."""
        section = dict(app_config.get('synthetic', {}) or {})
        known = {f for f in cls.__dataclass_fields__}
        values = {k: v for k, v in section.items() if k in known}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class SceneObject:
    """One generated object: kind is 'cuboid' or 'ellipsoid'"""
    kind: str
    class_id: int
    center: np.ndarray
    half_extents: np.ndarray
    yaw: float = 0.0

    @property
    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    @property
    def footprint_radius(self) -> float:
        return float(math.hypot(self.half_extents[0], self.half_extents[1]))


@dataclass
class SyntheticScene:
    """A generated scene plus everything needed to score the pipeline on it"""
    cloud: ScenePointCloud
    frames: FrameSet
    gt: List[GroundTruthInstance]
    ideal_detections: Dict[int, List[DetectionBox]]
    partial_point_masks: List[BinaryMask3D]
    objects: List[SceneObject] = field(default_factory=list)
    withheld: Tuple[int, ...] = ()
    class_names: List[str] = field(default_factory=lambda: list(CLASS_NAMES))

    def all_detections(self) -> List[DetectionBox]:
        return [box for fid in sorted(self.ideal_detections) for box in self.ideal_detections[fid]]

    def to_scene(self, frame_stride: int = 1) -> Scene:
        """In-memory pipeline input keeping the same frames load_scene keeps at this stride."""
        selected = select_strided(self.frames.frame_ids, frame_stride)
        keep = set(selected)
        frames = FrameSet(tuple(frame for frame in self.frames if frame.frame_id in keep))
        detections = {fid: list(self.ideal_detections.get(fid, [])) for fid in selected}
        return Scene(cloud=self.cloud, frames=frames, detections=detections,
                     point_masks=list(self.partial_point_masks), vocabulary=list(self.class_names))


# ============================================================================
# SURFACE SAMPLING
# ============================================================================

def _grid(half: float, spacing: float) -> np.ndarray:
    count = max(2, math.ceil(2.0 * half / spacing))
    step = 2.0 * half / count
    return -half + (np.arange(count) + 0.5) * step


def _sample_cuboid(half_extents: np.ndarray, spacing: float) -> Tuple[np.ndarray, np.ndarray]:
    points, normals = [], []
    for axis in range(3):
        b, c = [a for a in range(3) if a != axis]
        gb, gc = np.meshgrid(_grid(half_extents[b], spacing), _grid(half_extents[c], spacing), indexing='ij')
        for sign in (-1.0, 1.0):
            face = np.zeros((gb.size, 3))
            face[:, axis] = sign * half_extents[axis]
            face[:, b] = gb.ravel()
            face[:, c] = gc.ravel()
            normal = np.zeros((gb.size, 3))
            normal[:, axis] = sign
            points.append(face)
            normals.append(normal)
    return np.vstack(points), np.vstack(normals)


def _ellipsoid_area(a: float, b: float, c: float) -> float:
    p = 1.6075
    return 4.0 * math.pi * (((a * b) ** p + (a * c) ** p + (b * c) ** p) / 3.0) ** (1.0 / p)


def _sample_ellipsoid(half_extents: np.ndarray, spacing: float) -> Tuple[np.ndarray, np.ndarray]:
    count = max(50, math.ceil(_ellipsoid_area(*half_extents) / spacing ** 2))
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(1.0 - z * z)
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    sphere = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    points = sphere * half_extents
    normals = sphere / half_extents
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return points, normals


def sample_surface(obj: SceneObject, spacing: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Surface points and outward unit normals of an object in world coordinates.

    Args:
        obj (SceneObject): Object
        spacing (float): Approximate distance between samples

    Returns:
        tuple: (points M x 3, normals M x 3)
    """
    sampler = _sample_cuboid if obj.kind == 'cuboid' else _sample_ellipsoid
    local_points, local_normals = sampler(obj.half_extents, spacing)
    rotation = obj.rotation
    return local_points @ rotation.T + obj.center, local_normals @ rotation.T


# ============================================================================
# CAMERAS AND RENDERING
# ============================================================================

def look_at_camera(eye, target, width: int, height: int, fov_degrees: float = 70.0) -> CameraParams:
    """
    Pinhole camera at `eye` looking at `target` with z up.

    The principal point sits on pixel (W/2, H/2).
    """
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    forward /= np.linalg.norm(forward)
    up = UP if abs(float(forward @ UP)) < 0.999 else np.array([0.0, 1.0, 0.0])
    right = np.cross(forward, up)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)

    rotation = np.vstack([right, down, forward])
    extrinsic = np.eye(4)
    extrinsic[:3, :3] = rotation
    extrinsic[:3, 3] = -rotation @ eye

    focal = (width / 2.0) / math.tan(math.radians(fov_degrees) / 2.0)
    intrinsic = np.eye(4)
    intrinsic[0, 0] = intrinsic[1, 1] = focal
    intrinsic[0, 2] = width / 2.0
    intrinsic[1, 2] = height / 2.0
    return CameraParams(intrinsic=intrinsic, extrinsic=extrinsic, width=width, height=height)


def _ray_hits_cuboid(origin: np.ndarray, directions: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Entry distance along each ray (inf on a miss); slab test in the object frame."""
    with np.errstate(divide='ignore', invalid='ignore'):
        t1 = (-half - origin) / directions
        t2 = (half - origin) / directions
    near = np.minimum(t1, t2)
    far = np.maximum(t1, t2)
    parallel = directions == 0
    inside_slab = np.abs(origin) <= half
    near = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), near)
    far = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), far)
    t_near = near.max(axis=1)
    t_far = far.min(axis=1)
    hit = (t_near <= t_far) & (t_near > 0)
    return np.where(hit, t_near, np.inf)


def _ray_hits_ellipsoid(origin: np.ndarray, directions: np.ndarray, half: np.ndarray) -> np.ndarray:
    o = origin / half
    d = directions / half
    a = np.einsum('ij,ij->i', d, d)
    b = 2.0 * d @ o
    c = float(o @ o) - 1.0
    disc = b * b - 4.0 * a * c
    with np.errstate(invalid='ignore'):
        t = (-b - np.sqrt(disc)) / (2.0 * a)
    hit = (disc >= 0) & (t > 0)
    return np.where(hit, t, np.inf)


def ray_distances(obj: SceneObject, origin: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """
    Ray parameter of the first surface hit per ray, inf on a miss.

    Args:
        obj (SceneObject): Object
        origin (ndarray): World ray origin (3,)
        directions (ndarray): M x 3 world directions, not necessarily unit

    Returns:
        ndarray: M ray parameters
    """
    rotation = obj.rotation
    local_origin = rotation.T @ (origin - obj.center)
    local_dirs = directions @ rotation
    if obj.kind == 'cuboid':
        return _ray_hits_cuboid(local_origin, local_dirs, obj.half_extents)
    return _ray_hits_ellipsoid(local_origin, local_dirs, obj.half_extents)


def _ray_hits_floor(origin: np.ndarray, directions: np.ndarray, floor_size: float) -> np.ndarray:
    """Hit parameter on the square z = 0 of side floor_size centered at the origin, inf on a miss."""
    with np.errstate(divide='ignore', invalid='ignore'):
        t = -origin[2] / directions[:, 2]
        hits = origin[:2] + t[:, None] * directions[:, :2]
        inside = np.all(np.abs(hits) <= floor_size / 2.0, axis=1)
    return np.where((t > 0) & inside, t, np.inf)


def render_depth(objects: Sequence[SceneObject], camera: CameraParams,
                 floor_size: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Render camera-frame depth by nearest analytic ray hit per pixel.

    Pixel (u, v) casts the ray ((u - cx) / fx, (v - cy) / fy, 1) in camera
    coordinates, so the hit parameter is the camera-frame depth. With a
    floor_size the square floor under the objects shows up in the depth
    map but owns no pixel.

    Args:
        objects (list): Objects to render
        camera (CameraParams): Camera
        floor_size (float, optional): Side of the floor square, no floor when None

    Returns:
        tuple: (depth H x W with 0 where nothing is hit, object index H x W with -1 off the objects)
    """
    vs, us = np.mgrid[0:camera.height, 0:camera.width]
    rays = np.column_stack([
        (us.ravel() - camera.cx) / camera.fx,
        (vs.ravel() - camera.cy) / camera.fy,
        np.ones(us.size),
    ])
    to_world = camera.camera_to_world
    directions = rays @ to_world[:3, :3].T
    origin = to_world[:3, 3]

    if floor_size is None:
        nearest = np.full(us.size, np.inf)
    else:
        nearest = _ray_hits_floor(origin, directions, floor_size)
    owner = np.full(us.size, -1, dtype=np.int64)
    for index, obj in enumerate(objects):
        t = ray_distances(obj, origin, directions)
        closer = t < nearest
        nearest[closer] = t[closer]
        owner[closer] = index
    depth = np.where(np.isfinite(nearest), nearest, 0.0)
    return depth.reshape(camera.height, camera.width), owner.reshape(camera.height, camera.width)


def ideal_boxes(owner: np.ndarray, objects: Sequence[SceneObject], frame_id: int, first_order: int,
                rng: Optional[np.random.Generator] = None, jitter: float = 0.0) -> List[DetectionBox]:
    """
    Tight boxes around each object's rendered pixels.

    A box spans [u_min - 0.5, u_max + 0.5] x [v_min - 0.5, v_max + 0.5], the
    area whose nearest pixels are the object's extreme pixels.
    """
    height, width = owner.shape
    boxes = []
    for index, obj in enumerate(objects):
        vs, us = np.nonzero(owner == index)
        if us.size < MIN_DETECTION_PIXELS:
            continue
        rect = np.array([us.min() - 0.5, vs.min() - 0.5, us.max() + 0.5, vs.max() + 0.5])
        if jitter > 0 and rng is not None:
            rect = rect + rng.uniform(-jitter, jitter, size=4)
        rect = np.clip(rect, 0.0, [width, height, width, height])
        if rect[0] >= rect[2] or rect[1] >= rect[3]:
            continue
        boxes.append(DetectionBox(frame_id=frame_id, rect=tuple(float(v) for v in rect),
                                  class_id=obj.class_id, confidence=1.0, order=first_order + len(boxes)))
    return boxes


# ============================================================================
# GENERATION
# ============================================================================

def _random_object(rng: np.random.Generator, class_id: int) -> Tuple[str, np.ndarray]:
    kind = 'cuboid' if class_id < 3 else 'ellipsoid'
    low, high = SIZE_BUCKETS[class_id % 3]
    return kind, rng.uniform(low, high, size=3)


def placement_radius(config: SyntheticConfig) -> float:
    """Radius of the disc holding every object footprint."""
    return PLACEMENT_DISC * config.room_extent


def _try_layout(radii: np.ndarray, disc_radius: float, retries: int,
                rng: np.random.Generator) -> Optional[np.ndarray]:
    """Footprint centers placed one by one in the given order, or None when one finds no free spot."""
    centers = np.zeros((len(radii), 2))
    for slot, radius in enumerate(radii):
        for _ in range(retries):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            distance = math.sqrt(rng.uniform(0.0, 1.0)) * max(0.0, disc_radius - radius)
            xy = np.array([distance * math.cos(angle), distance * math.sin(angle)])
            gaps = np.linalg.norm(centers[:slot] - xy, axis=1) - radii[:slot] - radius
            if np.all(gaps > PLACEMENT_GAP):
                centers[slot] = xy
                break
        else:
            return None
    return centers


def place_objects(config: SyntheticConfig, rng: np.random.Generator) -> List[SceneObject]:
    """
    Place non-overlapping objects resting on z = 0 inside the placement disc.

    Every object is drawn first. Footprints are then placed largest first,
    and the whole layout restarts when one of them finds no free spot.
    The returned list keeps the draw order.

    Args:
        config (SyntheticConfig): Object range, room extent and retry budget
        rng (Generator): Seeded source of every draw

    Returns:
        list: Placed objects

    Raises:
        InfeasiblePlacement: No layout succeeded within LAYOUT_ATTEMPTS restarts
    """
    count = int(rng.integers(config.objects_min, config.objects_max + 1))
    drawn = []
    for _ in range(count):
        class_id = int(rng.integers(0, len(CLASS_NAMES)))
        kind, half = _random_object(rng, class_id)
        yaw = float(rng.uniform(0.0, math.pi)) if kind == 'cuboid' else 0.0
        drawn.append((class_id, kind, half, yaw))

    radii = np.array([math.hypot(half[0], half[1]) for _, _, half, _ in drawn])
    order = np.argsort(-radii, kind='stable')
    disc_radius = placement_radius(config)
    for attempt in range(1, LAYOUT_ATTEMPTS + 1):
        centers = _try_layout(radii[order], disc_radius, config.max_placement_retries, rng)
        if centers is not None:
            break
        logger.debug(f"Layout attempt {attempt} of {LAYOUT_ATTEMPTS} failed for {count} objects")
    else:
        raise InfeasiblePlacement(
            f"Could not place {count} objects in a disc of radius {disc_radius:.2f} m "
            f"after {LAYOUT_ATTEMPTS} layouts of {config.max_placement_retries} tries per object"
        )

    positions = np.empty_like(centers)
    positions[order] = centers
    return [
        SceneObject(kind=kind, class_id=class_id, center=np.array([x, y, half[2]]), half_extents=half, yaw=yaw)
        for (class_id, kind, half, yaw), (x, y) in zip(drawn, positions)
    ]


def orbit_eye(distance: float, elevation_degrees: float, azimuth: float) -> np.ndarray:
    """Camera position at `distance` from the origin, raised by the elevation angle."""
    elevation = math.radians(elevation_degrees)
    return distance * np.array([
        math.cos(elevation) * math.cos(azimuth),
        math.cos(elevation) * math.sin(azimuth),
        math.sin(elevation),
    ])


def _placement_rims(radius: float, samples: int = 64) -> np.ndarray:
    angles = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    ring = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])
    return np.vstack([np.column_stack([ring, np.full(samples, z)]) for z in (0.0, MAX_OBJECT_HEIGHT)])


def _keeps_in_view(camera: CameraParams, points: np.ndarray, margin: float) -> bool:
    cam = points @ camera.extrinsic[:3, :3].T + camera.extrinsic[:3, 3]
    if np.any(cam[:, 2] <= 0):
        return False
    u = camera.fx * cam[:, 0] / cam[:, 2] + camera.cx
    v = camera.fy * cam[:, 1] / cam[:, 2] + camera.cy
    return bool(np.all((u >= margin) & (u <= camera.width - margin)
                       & (v >= margin) & (v <= camera.height - margin)))


def fit_orbit_distance(config: SyntheticConfig) -> float:
    """
    Closest orbit distance that keeps the placement cylinder in view.

    The cylinder spans the placement disc from the floor to the tallest
    possible object. Its rims must project at least ORBIT_MARGIN_PIXELS
    (at most a quarter of the shorter image side) inside the image. The
    orbit is symmetric about z, so the first camera decides for all.

    Raises:
        InvalidConfig: No distance in the search range keeps the cylinder in view
    """
    rims = _placement_rims(placement_radius(config))
    margin = min(ORBIT_MARGIN_PIXELS, min(config.width, config.height) / 4.0)
    start = max(placement_radius(config), ORBIT_DISTANCE_STEP)
    for step in range(ORBIT_SEARCH_STEPS):
        distance = start + step * ORBIT_DISTANCE_STEP
        eye = orbit_eye(distance, config.camera_elevation, 0.0)
        camera = look_at_camera(eye, ORBIT_TARGET, config.width, config.height, config.fov_degrees)
        if _keeps_in_view(camera, rims, margin):
            logger.debug(f"Orbit distance {distance:.2f} m at elevation {config.camera_elevation} degrees")
            return distance
    raise InvalidConfig(
        f"No orbit distance keeps the placement disc in a {config.width}x{config.height} "
        f"view at fov {config.fov_degrees} degrees"
    )


def orbit_cameras(config: SyntheticConfig) -> List[CameraParams]:
    """Evenly spaced cameras looking down at the placement disc from camera_elevation."""
    distance = fit_orbit_distance(config)
    cameras = []
    for i in range(config.frames):
        eye = orbit_eye(distance, config.camera_elevation, 2.0 * math.pi * i / config.frames)
        cameras.append(look_at_camera(eye, ORBIT_TARGET, config.width, config.height, config.fov_degrees))
    return cameras


def build_scene(objects: Sequence[SceneObject], cameras: Sequence[CameraParams], spacing: float,
                withheld: Sequence[int] = (), jitter: float = 0.0,
                rng: Optional[np.random.Generator] = None, floor_size: Optional[float] = None) -> SyntheticScene:
    """
    Sample, render and annotate a fixed object layout.

    Args:
        objects (list): Objects in class-independent order
        cameras (list): One camera per frame (frame id = position)
        spacing (float): Surface sample spacing in meters
        withheld (list): Object indices left out of the point-based masks
        jitter (float): Uniform pixel jitter on ideal boxes
        rng (Generator, optional): Source of jitter
        floor_size (float, optional): Side of a floor square rendered into the depth maps only

    Returns:
        SyntheticScene: Scene with ground truth and ideal detections
    """
    points, normals, gt = [], [], []
    offset = 0
    for obj in objects:
        p, n = sample_surface(obj, spacing)
        points.append(p)
        normals.append(n)
        gt.append(GroundTruthInstance(mask=BinaryMask3D(np.arange(offset, offset + len(p)), presorted=True),
                                      class_id=obj.class_id))
        offset += len(p)
    cloud = ScenePointCloud(points=np.vstack(points), normals=np.vstack(normals))

    frames, detections = [], {}
    order = 0
    for frame_id, camera in enumerate(cameras):
        depth, owner = render_depth(objects, camera, floor_size)
        frames.append(Frame(frame_id=frame_id, camera=camera, depth=depth))
        boxes = ideal_boxes(owner, objects, frame_id, order, rng, jitter)
        detections[frame_id] = boxes
        order += len(boxes)

    withheld = tuple(sorted(int(i) for i in withheld))
    partial = [gt[i].mask for i in range(len(objects)) if i not in withheld]
    return SyntheticScene(cloud=cloud, frames=FrameSet(tuple(frames)), gt=gt, ideal_detections=detections,
                          partial_point_masks=partial, objects=list(objects), withheld=withheld)


def validate_synthetic_config(config: SyntheticConfig) -> None:
    """Raise InvalidConfig for parameters the generator cannot honor."""
    if config.objects_min < 1 or config.objects_max < config.objects_min:
        raise InvalidConfig(f"invalid object range {config.objects_min}..{config.objects_max}")
    if not 0.0 <= config.withhold_fraction <= 1.0:
        raise InvalidConfig(f"withhold_fraction must be within [0, 1], got {config.withhold_fraction}")
    if config.frames < 1 or config.width < 1 or config.height < 1:
        raise InvalidConfig(f"frames and image size must be positive, got {config.frames} frames "
                            f"of {config.width}x{config.height}")
    if not 0.0 < config.camera_elevation < 90.0:
        raise InvalidConfig(f"camera_elevation must be within (0, 90) degrees, got {config.camera_elevation}")
    if config.room_extent <= 0 or config.point_spacing <= 0:
        raise InvalidConfig("room_extent and point_spacing must be positive")


def generate_synthetic_scene(config: SyntheticConfig) -> SyntheticScene:
    """
    Generate a seeded scene of cuboids and ellipsoids seen by an orbiting camera.

    The same config always yields the same scene. The room floor appears
    in the depth maps but not in the cloud or the ground truth.

    Args:
        config (SyntheticConfig): Generator parameters including the seed

    Returns:
        SyntheticScene: Cloud, frames, ground truth, ideal detections and partial point masks

    Raises:
        InvalidConfig: Parameters out of range
        InfeasiblePlacement: The objects do not fit the placement disc
    """
    validate_synthetic_config(config)

    rng = np.random.default_rng(config.seed)
    objects = place_objects(config, rng)
    withheld_count = int(round(config.withhold_fraction * len(objects)))
    withheld = sorted(rng.choice(len(objects), size=withheld_count, replace=False).tolist())
    jitter_rng = np.random.default_rng([config.seed, 1])

    scene = build_scene(objects, orbit_cameras(config), config.point_spacing, withheld=withheld,
                        jitter=config.jitter, rng=jitter_rng, floor_size=config.room_extent)
    logger.info(
        f"Synthetic scene: {len(objects)} objects ({len(withheld)} withheld), "
        f"{scene.cloud.point_count} points, {len(scene.frames)} frames, "
        f"{len(scene.all_detections())} boxes"
    )
    return scene


def write_synthetic_scene(scene: SyntheticScene, directory, depth_scale: float = 1000.0) -> Path:
    """
    Write a scene directory readable by load_scene, plus gt.txt and classes.txt.

    Returns:
        Path: The scene directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_points = scene.cloud.point_count
    write_point_cloud(scene.cloud, directory / "cloud.ply")
    write_frames(scene.frames, directory / "frames", depth_scale=depth_scale)
    write_detections(scene.all_detections(), directory / "detections.jsonl")
    write_masks(scene.partial_point_masks, n_points, directory / "masks.txt")
    write_ground_truth(scene.gt, n_points, directory / "gt.txt")
    write_vocabulary(scene.class_names, directory / "classes.txt")
    logger.info(f"Wrote synthetic scene to {directory}")
    return directory
