"""
Evaluation Package
mAP metrics and the synthetic scene generator
"""

from .metrics import IOU_THRESHOLDS, APReport, mask_iou, compute_ap, compute_map_suite
from .synthetic import (
    CLASS_NAMES, SyntheticConfig, SyntheticScene, SceneObject, generate_synthetic_scene,
    write_synthetic_scene, look_at_camera, render_depth, sample_surface, build_scene,
)

__all__ = [
    'IOU_THRESHOLDS', 'APReport', 'mask_iou', 'compute_ap', 'compute_map_suite',
    'CLASS_NAMES', 'SyntheticConfig', 'SyntheticScene', 'SceneObject', 'generate_synthetic_scene',
    'write_synthetic_scene', 'look_at_camera', 'render_depth', 'sample_surface', 'build_scene',
]
