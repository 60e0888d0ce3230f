"""
Scene I/O Package
Readers for pipeline inputs and writers for pipeline outputs
"""

from .extract_scene import (
    load_point_cloud, load_frames, load_detections, load_masks, load_superpoints,
    load_ground_truth, load_labeled_instances, load_vocabulary, load_scene,
    assign_detections,
)
from .load import (
    save_labeled_instances, save_superpoints, write_point_cloud, write_frames,
    write_detections, write_masks, write_ground_truth, write_json,
)

__all__ = [
    'load_point_cloud', 'load_frames', 'load_detections', 'load_masks', 'load_superpoints',
    'load_ground_truth', 'load_labeled_instances', 'load_vocabulary', 'load_scene',
    'assign_detections', 'save_labeled_instances', 'save_superpoints', 'write_point_cloud',
    'write_frames', 'write_detections', 'write_masks', 'write_ground_truth', 'write_json',
]
