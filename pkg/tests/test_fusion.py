"""
Proposal fusion tests
"""

import json

import numpy as np
import pytest

from fusion.proposals import (
    CandidateSet, CoarseMask, assign_superpoints, filter_redundant_boxes, filter_rgbd_masks,
    fuse_proposals, generate_rgbd_masks, merge_coarse_masks, save_candidate_history,
)
from geometry.boxes import OrientedBox3D
from scene_io.types import BinaryMask3D, MaskSource, ScenePointCloud, SuperpointPartition
from superpoints.segmentation import compute_superpoints
from utils.config import PipelineConfig

UNIT_BOX = OrientedBox3D(center=np.zeros(3), axes=np.eye(3), half_extents=np.array([1.0, 1.0, 1.0]))


def cloud_with_inside_count(inside: int, total: int) -> ScenePointCloud:
    """`inside` points at the origin, the rest far outside UNIT_BOX."""
    points = np.zeros((total, 3))
    points[inside:, 0] = 5.0
    return ScenePointCloud(points=points)


def coarse(ids, class_id=0, frame=0, partition=None):
    """Coarse mask over singleton superpoints unless a partition is given."""
    if partition is None:
        mask = BinaryMask3D(ids)
        return CoarseMask(superpoint_ids=tuple(sorted(set(ids))), class_id=class_id, point_set=mask,
                          source_frame=frame)
    return CoarseMask.from_superpoints(ids, partition, class_id, frame)


def reference_merge(per_frame, tau_merge):
    """Python-set rendition of sequential merging."""
    candidates = []
    seeded = False
    for masks in per_frame:
        if not masks:
            continue
        if not seeded:
            candidates = [(m.class_id, set(m.point_set.to_list())) for m in masks]
            seeded = True
            continue
        for m in masks:
            points = set(m.point_set.to_list())
            best, best_iou = None, -1.0
            for index, (class_id, existing) in enumerate(candidates):
                if class_id != m.class_id:
                    continue
                union = len(existing | points)
                iou = len(existing & points) / union if union else 0.0
                if iou > best_iou:
                    best, best_iou = index, iou
            if best is not None and best_iou >= tau_merge:
                candidates[best] = (m.class_id, candidates[best][1] | points)
            else:
                candidates.append((m.class_id, points))
    return candidates


# ============================================================================
# THRESHOLD BOUNDARIES
# ============================================================================

def test_redundant_box_threshold_is_inclusive():
    cloud = cloud_with_inside_count(3, 4)
    point_masks = [BinaryMask3D([0, 1, 2, 3])]
    assert filter_redundant_boxes([(UNIT_BOX, 2)], point_masks, cloud, tau_box=0.75) == []
    assert filter_redundant_boxes([(UNIT_BOX, 2)], point_masks, cloud, tau_box=0.76) == [(UNIT_BOX, 2)]


def test_superpoint_threshold_is_inclusive():
    cloud = cloud_with_inside_count(5, 10)
    partition = SuperpointPartition.from_labels([0] * 10)
    selected = assign_superpoints(UNIT_BOX, partition, cloud, tau_spp=0.5, class_id=3, source_frame=7)
    assert selected.superpoint_ids == (0,)
    assert selected.class_id == 3
    assert selected.source_frame == 7
    assert selected.point_set == BinaryMask3D(range(10))

    cloud = cloud_with_inside_count(4, 10)
    assert assign_superpoints(UNIT_BOX, partition, cloud, tau_spp=0.5) is None


def test_assigned_masks_are_whole_superpoints():
    cloud = cloud_with_inside_count(6, 12)
    partition = SuperpointPartition.from_labels([0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2])
    selected = assign_superpoints(UNIT_BOX, partition, cloud, tau_spp=0.5)
    # segment 1 has 3 of 6 points inside
    assert selected.superpoint_ids == (0, 1)
    assert selected.point_set == BinaryMask3D(range(9))


def test_filter_rgbd_keeps_iou_equal_to_threshold():
    candidates = CandidateSet(candidates=[coarse([0, 1, 2, 3]), coarse([10, 11])])
    point_masks = [BinaryMask3D([0, 1, 2]), BinaryMask3D([10, 11])]
    survivors = filter_rgbd_masks(candidates, point_masks, tau_filter=0.75)
    assert [c.point_set.to_list() for c in survivors] == [[0, 1, 2, 3]]


def test_filter_rgbd_without_point_masks_keeps_everything():
    candidates = CandidateSet(candidates=[coarse([0, 1]), coarse([2])])
    assert len(filter_rgbd_masks(candidates, [], tau_filter=0.0)) == 2


# ============================================================================
# MERGING
# ============================================================================

def test_merge_threshold_is_inclusive():
    # IoU of {0..3} and {3..6} is 1/7; IoU of {0..3} and {2..5} is 2/6
    merged = merge_coarse_masks([[coarse([0, 1, 2, 3])], [coarse([2, 3, 4, 5])]], tau_merge=1 / 3)
    assert len(merged) == 1
    assert merged.candidates[0].point_set == BinaryMask3D(range(6))

    separate = merge_coarse_masks([[coarse([0, 1, 2, 3])], [coarse([3, 4, 5, 6])]], tau_merge=0.25)
    assert len(separate) == 2


def test_merge_respects_class_labels():
    merged = merge_coarse_masks([[coarse([0, 1, 2], class_id=1)], [coarse([0, 1, 2], class_id=2)]], 0.25)
    assert [c.class_id for c in merged.candidates] == [1, 2]


def test_merge_ties_go_to_lowest_index():
    seeds = [coarse([0, 1], frame=0), coarse([2, 3], frame=0)]
    merged = merge_coarse_masks([seeds, [coarse([1, 2], frame=1)]], tau_merge=0.3)
    assert merged.candidates[0].point_set == BinaryMask3D([0, 1, 2])
    assert merged.candidates[1].point_set == BinaryMask3D([2, 3])


def test_merge_seeds_from_first_frame_with_masks():
    merged = merge_coarse_masks([[], [coarse([0, 1], frame=1), coarse([0, 1], frame=1)]], tau_merge=0.25)
    # seeding frame masks are never merged with each other
    assert len(merged) == 2
    assert [h['action'] for h in merged.history] == ['seed', 'seed']


def test_later_masks_merge_within_their_frame():
    frames = [[coarse([0, 1], frame=0)], [coarse([5, 6], frame=1), coarse([5, 6, 7], frame=1)]]
    merged = merge_coarse_masks(frames, tau_merge=0.25)
    assert [c.point_set.to_list() for c in merged.candidates] == [[0, 1], [5, 6, 7]]
    assert [h['action'] for h in merged.history] == ['seed', 'append', 'merge']


@pytest.mark.parametrize("seed", range(8))
def test_merge_matches_reference(seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 12, size=60)
    labels[:12] = np.arange(12)
    partition = SuperpointPartition.from_labels(labels)
    per_frame = []
    for frame in range(int(rng.integers(3, 6))):
        masks = []
        for _ in range(int(rng.integers(0, 4))):
            ids = rng.choice(partition.segment_count, size=int(rng.integers(1, 5)), replace=False)
            masks.append(coarse(ids.tolist(), class_id=int(rng.integers(0, 2)), frame=frame, partition=partition))
        per_frame.append(masks)
    for tau in (0.0, 0.25, 0.5, 1.0):
        merged = merge_coarse_masks(per_frame, tau)
        expected = reference_merge(per_frame, tau)
        assert [(c.class_id, set(c.point_set.to_list())) for c in merged.candidates] == expected
        for candidate in merged.candidates:
            assert candidate.point_set == partition.mask_of(candidate.superpoint_ids)


def test_merge_is_idempotent_on_repeated_frame():
    frame = [coarse([0, 1, 2], class_id=0), coarse([5, 6], class_id=1)]
    once = merge_coarse_masks([frame], 0.25)
    twice = merge_coarse_masks([frame, frame], 0.25)
    assert [c.point_set for c in once.candidates] == [c.point_set for c in twice.candidates]


def test_candidate_history_dump(tmp_path):
    merged = merge_coarse_masks([[coarse([0, 1])], [coarse([1, 2])]], tau_merge=0.25)
    path = save_candidate_history(merged, tmp_path / "candidates.jsonl")
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r['action'] for r in records] == ['seed', 'merge']
    assert records[1]['superpoints'] == [0, 1, 2]


# ============================================================================
# FUSION
# ============================================================================

def test_fuse_orders_point_masks_first():
    point_masks = [BinaryMask3D([0, 1]), BinaryMask3D([4])]
    proposals = fuse_proposals(point_masks, [coarse([7, 8], class_id=5)])
    assert [p.source for p in proposals] == [MaskSource.POINT_BASED, MaskSource.POINT_BASED, MaskSource.RGBD_BASED]
    assert proposals[0].class_id is None
    assert proposals[2].class_id == 5
    assert proposals[2].mask == BinaryMask3D([7, 8])


def test_generate_rgbd_masks_recovers_withheld_object(separated_scene):
    scene = separated_scene.to_scene()
    config = PipelineConfig(pixel_stride=2)
    partition = compute_superpoints(scene.cloud, config.granularity, config.knn, config.min_segment_size)
    result = generate_rgbd_masks(scene, partition, config)

    assert result.boxes_total == len(separated_scene.all_detections())
    assert result.boxes_skipped == 0
    withheld = separated_scene.gt[1].mask
    best = max(result.masks, key=lambda c: c.point_set.intersection_size(withheld))
    assert best.class_id == 4
    assert best.point_set.intersection_size(withheld) / len(best.point_set) > 0.9
    for mask in result.masks:
        assert mask.point_set == partition.mask_of(mask.superpoint_ids)


def test_generate_rgbd_masks_with_pool_matches_serial(separated_scene):
    from concurrent.futures import ThreadPoolExecutor

    scene = separated_scene.to_scene()
    config = PipelineConfig(pixel_stride=3)
    partition = compute_superpoints(scene.cloud, config.granularity, config.knn, config.min_segment_size)
    serial = generate_rgbd_masks(scene, partition, config)
    with ThreadPoolExecutor(max_workers=4) as pool:
        pooled = generate_rgbd_masks(scene, partition, config, pool=pool)
    assert [m.point_set for m in serial.masks] == [m.point_set for m in pooled.masks]
    assert serial.candidates.history == pooled.candidates.history
    assert serial.counts() == pooled.counts()
