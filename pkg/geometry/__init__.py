"""
Geometry Package
Projection, visibility, depth lifting and oriented boxes
"""

from .projection import (
    ProjectedPoints, VisibilityMatrices, project_all, compute_frame_visibility,
    compute_occlusion_visibility, compute_visibility, round_pixel,
)
from .lifting import lift_box_pixels, backproject_depth
from .boxes import OrientedBox3D, fit_oriented_box, points_in_box_fraction

__all__ = [
    'ProjectedPoints', 'VisibilityMatrices', 'project_all', 'compute_frame_visibility',
    'compute_occlusion_visibility', 'compute_visibility', 'round_pixel',
    'lift_box_pixels', 'backproject_depth',
    'OrientedBox3D', 'fit_oriented_box', 'points_in_box_fraction',
]
