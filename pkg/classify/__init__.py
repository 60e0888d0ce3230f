"""
Classification Package
Label maps and proposal labeling
"""

from .label_maps import NO_LABEL, paint_label_map, build_label_maps, save_label_maps, painting_order, painted_area, pixel_rect
from .aggregation import (
    ClassDistribution, select_topk_frames, aggregate_distribution, assign_labels, classify_proposals,
)

__all__ = [
    'NO_LABEL', 'paint_label_map', 'build_label_maps', 'save_label_maps', 'painting_order', 'painted_area', 'pixel_rect',
    'ClassDistribution', 'select_topk_frames', 'aggregate_distribution', 'assign_labels', 'classify_proposals',
]
