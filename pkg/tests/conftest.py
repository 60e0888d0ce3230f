"""
Shared test fixtures
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add packages to path
sys.path.append(str(Path(__file__).parent.parent))

from evaluation.synthetic import (
    SceneObject, SyntheticConfig, build_scene, generate_synthetic_scene, look_at_camera,
    write_synthetic_scene,
)
from scene_io.types import CameraParams, Frame

FIXTURES = Path(__file__).parent / "fixtures"


def make_camera(width: int = 160, height: int = 120, focal: float = 100.0, extrinsic=None) -> CameraParams:
    """Camera at the origin looking down +z unless an extrinsic is given."""
    intrinsic = np.eye(4)
    intrinsic[0, 0] = intrinsic[1, 1] = focal
    intrinsic[0, 2] = width / 2.0
    intrinsic[1, 2] = height / 2.0
    return CameraParams(intrinsic=intrinsic, extrinsic=np.eye(4) if extrinsic is None else extrinsic,
                        width=width, height=height)


def make_frame(frame_id: int = 0, depth_value: float = 0.0, **camera_kwargs) -> Frame:
    camera = make_camera(**camera_kwargs)
    depth = np.full((camera.height, camera.width), depth_value)
    return Frame(frame_id=frame_id, camera=camera, depth=depth)


def separated_layout():
    """A cuboid and an ellipsoid 1.6 m apart, seen from an arc where neither hides the other."""
    objects = [
        SceneObject(kind='cuboid', class_id=1, center=np.array([-0.8, 0.0, 0.2]),
                    half_extents=np.array([0.2, 0.2, 0.2]), yaw=0.3),
        SceneObject(kind='ellipsoid', class_id=4, center=np.array([0.8, 0.0, 0.22]),
                    half_extents=np.array([0.22, 0.2, 0.22])),
    ]
    cameras = []
    for angle in np.linspace(math.radians(60), math.radians(120), 6):
        eye = np.array([2.4 * math.cos(angle), 2.4 * math.sin(angle), 1.6])
        cameras.append(look_at_camera(eye, [0.0, 0.0, 0.3], 160, 120, 70.0))
    return objects, cameras


@pytest.fixture(scope="session")
def separated_scene():
    """Two-object scene with the ellipsoid withheld from the point-based masks."""
    objects, cameras = separated_layout()
    return build_scene(objects, cameras, spacing=0.04, withheld=[1])


@pytest.fixture(scope="session")
def small_synthetic():
    config = SyntheticConfig(objects_min=3, objects_max=3, frames=6, width=160, height=120,
                             withhold_fraction=0.34, seed=11)
    return generate_synthetic_scene(config)


@pytest.fixture
def scene_dir(tmp_path, separated_scene):
    return write_synthetic_scene(separated_scene, tmp_path / "scene")
