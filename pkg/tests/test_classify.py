"""
Label map and classification tests
"""

import numpy as np
import pytest
from PIL import Image

from classify.aggregation import (
    ClassDistribution, aggregate_distribution, assign_labels, classify_proposals, select_topk_frames,
)
from classify.label_maps import (
    NO_LABEL, build_label_maps, paint_label_map, painted_area, painting_order, pixel_rect, save_label_maps,
)
from conftest import make_frame
from fusion.proposals import Proposal
from geometry.projection import ProjectedPoints, VisibilityMatrices
from scene_io.types import BinaryMask3D, DetectionBox, FrameSet, MaskSource


def box(rect, class_id, order=0, frame_id=0):
    return DetectionBox(frame_id=frame_id, rect=tuple(float(v) for v in rect), class_id=class_id,
                        confidence=1.0, order=order)


def min_area_oracle(boxes, width, height):
    """Per-pixel smallest covering box by painted pixels; among equal areas the later file entry."""
    labels = np.full((height, width), NO_LABEL)
    best_area = np.full((height, width), np.inf)
    best_order = np.full((height, width), -1)
    for b in boxes:
        x0, y0, x1, y1 = (int(np.floor(v + 0.5)) for v in b.rect)
        covered = np.zeros((height, width), dtype=bool)
        covered[max(0, y0):max(0, y1), max(0, x0):max(0, x1)] = True
        area = int(covered.sum())
        better = covered & ((area < best_area) | ((area == best_area) & (b.order > best_order)))
        labels[better] = b.class_id
        best_area[better] = area
        best_order[better] = b.order
    return labels


def single_frame_projection(pixels):
    pixels = np.asarray(pixels, dtype=float)
    return ProjectedPoints(pixel_x=pixels[None, :, 0], pixel_y=pixels[None, :, 1],
                           cam_z=np.ones((1, len(pixels))))


def all_visible(frame_count, point_count):
    ones = np.ones((frame_count, point_count), dtype=bool)
    return VisibilityMatrices(frame_vis=ones, depth_vis=ones.copy())


# ============================================================================
# LABEL MAPS
# ============================================================================

def test_small_box_paints_over_large_box():
    labels = paint_label_map([box([0, 0, 100, 100], 2, order=0), box([10, 10, 20, 20], 7, order=1)], 300, 300)
    assert labels[15, 15] == 7
    assert labels[50, 50] == 2
    assert labels[200, 200] == NO_LABEL


def test_painting_ignores_file_order_for_different_areas():
    labels = paint_label_map([box([10, 10, 20, 20], 7, order=0), box([0, 0, 100, 100], 2, order=1)], 300, 300)
    assert labels[15, 15] == 7


def test_equal_areas_later_box_wins():
    labels = paint_label_map([box([0, 0, 10, 10], 1, order=0), box([5, 5, 15, 15], 2, order=1)], 20, 20)
    assert labels[7, 7] == 2
    assert labels[2, 2] == 1


def test_pixel_rect_rounds_corners():
    assert pixel_rect(box([0.4, 0.5, 2.5, 3.49], 0), 10, 10) == (0, 1, 3, 3)
    assert pixel_rect(box([-3.0, 2.0, 30.0, 8.0], 0), 10, 10) == (0, 2, 10, 8)


@pytest.mark.parametrize("seed", range(20))
def test_label_map_matches_min_area_oracle(seed):
    rng = np.random.default_rng(seed)
    width, height = 40, 30
    boxes = []
    for order in range(int(rng.integers(1, 31))):
        x0, x1 = sorted(rng.choice(width + 1, size=2, replace=False).tolist())
        y0, y1 = sorted(rng.choice(height + 1, size=2, replace=False).tolist())
        boxes.append(box([x0, y0, x1, y1], int(rng.integers(0, 5)), order=order))
    assert np.array_equal(paint_label_map(boxes, width, height), min_area_oracle(boxes, width, height))


@pytest.mark.parametrize("seed", range(20))
def test_label_map_with_fractional_boxes_matches_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    width, height = 40, 30
    boxes = []
    for order in range(int(rng.integers(1, 31))):
        x0, x1 = np.sort(rng.uniform(-2.0, width + 2.0, size=2))
        y0, y1 = np.sort(rng.uniform(-2.0, height + 2.0, size=2))
        boxes.append(box([x0, y0, x1, y1], int(rng.integers(0, 5)), order=order))
    assert np.array_equal(paint_label_map(boxes, width, height), min_area_oracle(boxes, width, height))


def test_painting_order_uses_rounded_pixel_area():
    wide = box([0.6, 0.6, 11.4, 11.4], 1, order=0)
    narrow = box([0.49, 0.49, 10.5, 10.5], 2, order=1)
    assert wide.area > narrow.area
    assert painted_area(wide, 20, 20) == 100
    assert painted_area(narrow, 20, 20) == 121
    assert painting_order([wide, narrow], 20, 20) == [narrow, wide]
    labels = paint_label_map([wide, narrow], 20, 20)
    assert labels[5, 5] == 1
    assert labels[0, 0] == 2


def test_build_and_save_label_maps(tmp_path):
    frames = FrameSet((make_frame(0, width=20, height=10), make_frame(3, width=20, height=10)))
    detections = {0: [box([2, 2, 6, 6], 4)], 3: []}
    maps = build_label_maps(detections, frames)
    assert sorted(maps) == [0, 3]
    assert maps[0][3, 3] == 4
    assert np.all(maps[3] == NO_LABEL)

    save_label_maps(maps, tmp_path)
    with Image.open(tmp_path / "0.labels.png") as image:
        decoded = np.array(image).astype(np.int64) - 1
    assert np.array_equal(decoded, maps[0])


# ============================================================================
# VOTING
# ============================================================================

def test_topk_frames_order_and_ties():
    depth_vis = np.array([
        [1, 0, 0],
        [1, 1, 0],
        [1, 1, 0],
        [0, 0, 0],
    ], dtype=bool)
    vis = VisibilityMatrices(frame_vis=np.ones((4, 3), dtype=bool), depth_vis=depth_vis)
    mask = BinaryMask3D([0, 1, 2])
    assert select_topk_frames(mask, vis, 2) == [1, 2]
    assert select_topk_frames(mask, vis, 5) == [1, 2, 0]
    assert select_topk_frames(BinaryMask3D([2]), vis, 5) == []


def test_aggregate_counts_labeled_and_unlabeled_samples():
    labels = np.full((10, 10), 3)
    labels[:, 5:] = 5
    labels[0, :] = NO_LABEL
    proj = single_frame_projection([[1.0, 5.0], [2.2, 4.8], [7.0, 5.0], [5.0, 0.3]])
    distribution = aggregate_distribution(BinaryMask3D([0, 1, 2, 3]), proj, all_visible(1, 4), [labels], [0])
    assert distribution.counts == {3: 2, 5: 1}
    assert distribution.total_labeled == 3
    assert distribution.total_sampled == 4


def test_aggregate_skips_invisible_points():
    labels = np.full((10, 10), 1)
    proj = single_frame_projection([[1.0, 1.0], [2.0, 2.0]])
    vis = VisibilityMatrices(frame_vis=np.array([[True, True]]), depth_vis=np.array([[True, False]]))
    distribution = aggregate_distribution(BinaryMask3D([0, 1]), proj, vis, [labels], [0])
    assert distribution.total_sampled == 1


def test_assign_labels_confidence_and_drop():
    proposals = [Proposal(mask=BinaryMask3D([0, 1]), source=MaskSource.POINT_BASED),
                 Proposal(mask=BinaryMask3D([2]), source=MaskSource.RGBD_BASED, class_id=9),
                 Proposal(mask=BinaryMask3D([3]), source=MaskSource.POINT_BASED)]
    distributions = [ClassDistribution({3: 50, 5: 10}, total_labeled=60, total_sampled=80),
                     ClassDistribution({2: 5, 1: 5}, total_labeled=10, total_sampled=10),
                     ClassDistribution({}, total_labeled=0, total_sampled=12)]
    instances = assign_labels(proposals, distributions)
    assert len(instances) == 2
    assert instances[0].class_id == 3
    assert instances[0].confidence == pytest.approx(0.625)
    # the voted class replaces the detector class
    assert instances[1].class_id == 1
    assert instances[1].source == MaskSource.RGBD_BASED
    with pytest.raises(ValueError):
        assign_labels(proposals, distributions[:2])


def test_classify_proposals_labels_ideal_scene(separated_scene):
    from geometry.projection import compute_visibility

    scene = separated_scene.to_scene()
    proj, vis = compute_visibility(scene.cloud, scene.frames, tau_depth=0.1)
    maps = build_label_maps(scene.detections, scene.frames)
    proposals = [Proposal(mask=g.mask, source=MaskSource.POINT_BASED) for g in separated_scene.gt]
    instances, distributions = classify_proposals(proposals, proj, vis, [maps[f] for f in scene.frames.frame_ids], 5)
    assert [i.class_id for i in instances] == [g.class_id for g in separated_scene.gt]
    for instance, distribution in zip(instances, distributions):
        assert 0.0 < instance.confidence <= 1.0
        assert distribution.total_labeled <= distribution.total_sampled
