"""
Proposal Fusion
Builds RGBD-based masks from lifted detector boxes and fuses them with point-based masks
"""

import json
import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from evaluation.metrics import mask_iou
from geometry.boxes import OrientedBox3D, fit_oriented_box
from geometry.lifting import lift_box_pixels
from scene_io.load import atomic_write
from scene_io.types import (
    BinaryMask3D, DetectionBox, Frame, MaskSource, Scene, ScenePointCloud, SuperpointPartition,
)
from utils.config import PipelineConfig
from utils.errors import EmptyLift

logger = logging.getLogger(__name__)


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class CoarseMask:
    """Superpoints assigned to one lifted box (or a merged group of them)"""
    superpoint_ids: Tuple[int, ...]
    class_id: int
    point_set: BinaryMask3D
    source_frame: int

    @classmethod
    def from_superpoints(cls, superpoint_ids, partition: SuperpointPartition,
                         class_id: int, source_frame: int) -> "CoarseMask":
        ids = tuple(sorted(int(s) for s in set(superpoint_ids)))
        return cls(superpoint_ids=ids, class_id=class_id,
                   point_set=partition.mask_of(ids), source_frame=source_frame)

    def merged_with(self, other: "CoarseMask") -> "CoarseMask":
        ids = tuple(sorted(set(self.superpoint_ids) | set(other.superpoint_ids)))
        return CoarseMask(superpoint_ids=ids, class_id=self.class_id,
                          point_set=self.point_set.union(other.point_set),
                          source_frame=self.source_frame)


@dataclass
class CandidateSet:
    """Merged RGBD candidates in insertion order, with the merge history"""
    candidates: List[CoarseMask] = field(default_factory=list)
    history: List[Dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.candidates)

    def _record(self, frame_id: int, action: str, index: int):
        candidate = self.candidates[index]
        self.history.append({
            'step': len(self.history),
            'frame_id': frame_id,
            'action': action,
            'candidate': index,
            'class_id': candidate.class_id,
            'superpoints': list(candidate.superpoint_ids),
        })


@dataclass(frozen=True)
class Proposal:
    """One fused 3D mask proposal; class_id is set only for RGBD-based masks"""
    mask: BinaryMask3D
    source: MaskSource
    class_id: Optional[int] = None


@dataclass
class RGBDProposals:
    """Outcome of RGBD-based mask generation for one scene"""
    masks: List[CoarseMask]
    candidates: CandidateSet
    boxes_total: int = 0
    boxes_skipped: int = 0
    boxes_redundant: int = 0
    coarse_masks: int = 0

    def counts(self) -> Dict[str, int]:
        return {
            'boxes': self.boxes_total,
            'boxes_skipped': self.boxes_skipped,
            'boxes_redundant': self.boxes_redundant,
            'coarse_masks': self.coarse_masks,
            'candidates': len(self.candidates),
            'rgbd_masks': len(self.masks),
        }


# ============================================================================
# THRESHOLD STEPS
# ============================================================================

def _box_is_redundant(inside: np.ndarray, point_masks: Sequence[BinaryMask3D], tau_box: float) -> bool:
    for mask in point_masks:
        if mask.is_empty:
            continue
        fraction = int(inside[mask.member_indices].sum()) / len(mask)
        if fraction >= tau_box:
            return True
    return False


def filter_redundant_boxes(boxes3d: Sequence[Tuple[OrientedBox3D, int]], point_masks: Sequence[BinaryMask3D],
                           cloud: ScenePointCloud, tau_box: float) -> List[Tuple[OrientedBox3D, int]]:
    """
    Drop lifted boxes that already hold most of a point-based mask.

    A box is removed when some point-based mask has at least tau_box of its
    points inside the box.

    Args:
        boxes3d (list): (OrientedBox3D, class_id) pairs
        point_masks (list): Point-based masks
        cloud (ScenePointCloud): Scene points
        tau_box (float): Inclusive threshold in [0, 1]

    Returns:
        list: Surviving pairs in input order
    """
    survivors = []
    for box, class_id in boxes3d:
        inside = box.contains_points(cloud.points)
        if not _box_is_redundant(inside, point_masks, tau_box):
            survivors.append((box, class_id))
    return survivors


def _select_superpoints(inside: np.ndarray, partition: SuperpointPartition, tau_spp: float) -> np.ndarray:
    inside_counts = np.bincount(partition.segment_of, weights=inside.astype(np.float64),
                                minlength=partition.segment_count)
    sizes = np.bincount(partition.segment_of, minlength=partition.segment_count)
    fractions = inside_counts / sizes
    return np.flatnonzero(fractions >= tau_spp)


def assign_superpoints(box3d: OrientedBox3D, partition: SuperpointPartition, cloud: ScenePointCloud,
                       tau_spp: float, class_id: int = 0, source_frame: int = -1) -> Optional[CoarseMask]:
    """
    Collect the superpoints with at least tau_spp of their points inside a box.

    Args:
        box3d (OrientedBox3D): Lifted box
        partition (SuperpointPartition): Scene superpoints
        cloud (ScenePointCloud): Scene points
        tau_spp (float): Inclusive threshold in [0, 1]
        class_id (int): Detector class carried by the coarse mask
        source_frame (int): Frame the box came from

    Returns:
        CoarseMask or None: None when no superpoint qualifies
    """
    inside = box3d.contains_points(cloud.points)
    selected = _select_superpoints(inside, partition, tau_spp)
    if selected.size == 0:
        return None
    return CoarseMask.from_superpoints(selected.tolist(), partition, class_id, source_frame)


def merge_coarse_masks(per_frame: Sequence[Sequence[CoarseMask]], tau_merge: float) -> CandidateSet:
    """
    Merge coarse masks across frames into RGBD candidates.

    The first frame with coarse masks seeds the set. Every later mask is
    compared with the current same-class candidates, including ones added
    earlier in its own frame; it merges into the best-IoU candidate when that
    IoU is at least tau_merge (lowest index wins ties), else it is appended.

    Args:
        per_frame (list): Coarse masks per frame, frames ascending, boxes in file order
        tau_merge (float): Inclusive threshold in [0, 1]

    Returns:
        CandidateSet: Candidates in insertion order
    """
    result = CandidateSet()
    seeded = False
    for masks in per_frame:
        if not masks:
            continue
        if not seeded:
            for mask in masks:
                result.candidates.append(mask)
                result._record(mask.source_frame, 'seed', len(result.candidates) - 1)
            seeded = True
            continue

        for mask in masks:
            best_index, best_iou = -1, -1.0
            for index, candidate in enumerate(result.candidates):
                if candidate.class_id != mask.class_id:
                    continue
                iou = mask_iou(candidate.point_set, mask.point_set)
                if iou > best_iou:
                    best_index, best_iou = index, iou
            if best_index >= 0 and best_iou >= tau_merge:
                result.candidates[best_index] = result.candidates[best_index].merged_with(mask)
                result._record(mask.source_frame, 'merge', best_index)
            else:
                result.candidates.append(mask)
                result._record(mask.source_frame, 'append', len(result.candidates) - 1)
    return result


def filter_rgbd_masks(candidates: CandidateSet, point_masks: Sequence[BinaryMask3D],
                      tau_filter: float) -> List[CoarseMask]:
    """
    Discard candidates whose IoU with any point-based mask exceeds tau_filter.

    Args:
        candidates (CandidateSet): Merged candidates
        point_masks (list): Point-based masks
        tau_filter (float): Strict threshold in [0, 1]

    Returns:
        list: Surviving candidates in order
    """
    survivors = []
    for candidate in candidates.candidates:
        best = max((mask_iou(candidate.point_set, mask) for mask in point_masks), default=0.0)
        if best <= tau_filter:
            survivors.append(candidate)
        else:
            logger.debug(f"Dropping candidate of class {candidate.class_id}: IoU {best:.3f} with a point mask")
    return survivors


def fuse_proposals(point_masks: Sequence[BinaryMask3D], rgbd_masks: Sequence[CoarseMask]) -> List[Proposal]:
    """Point-based masks first, then surviving RGBD masks, each in order."""
    proposals = [Proposal(mask=m, source=MaskSource.POINT_BASED) for m in point_masks]
    proposals.extend(
        Proposal(mask=c.point_set, source=MaskSource.RGBD_BASED, class_id=c.class_id) for c in rgbd_masks
    )
    return proposals


# ============================================================================
# SCENE-LEVEL GENERATION
# ============================================================================

@dataclass(frozen=True)
class _BoxOutcome:
    status: str
    mask: Optional[CoarseMask] = None


def _coarse_mask_for_box(box: DetectionBox, frame: Frame, scene: Scene, partition: SuperpointPartition,
                         config: PipelineConfig) -> _BoxOutcome:
    """Lift, fit, redundancy check and superpoint assignment for one box."""
    try:
        lifted = lift_box_pixels(box, frame, config.pixel_stride)
    except EmptyLift:
        logger.warning(f"Frame {frame.frame_id} box #{box.order}: no valid depth, skipped")
        return _BoxOutcome('skipped')
    if len(lifted) < config.min_lift_points:
        logger.warning(
            f"Frame {frame.frame_id} box #{box.order}: only {len(lifted)} lifted points "
            f"(< {config.min_lift_points}), skipped"
        )
        return _BoxOutcome('skipped')

    box3d = fit_oriented_box(lifted)
    inside = box3d.contains_points(scene.cloud.points)
    if _box_is_redundant(inside, scene.point_masks, config.tau_box):
        return _BoxOutcome('redundant')

    selected = _select_superpoints(inside, partition, config.tau_spp)
    if selected.size == 0:
        return _BoxOutcome('empty')
    return _BoxOutcome('ok', CoarseMask.from_superpoints(selected.tolist(), partition, box.class_id, frame.frame_id))


def save_candidate_history(candidates: CandidateSet, path) -> Path:
    """Write the merge history as JSON Lines."""
    path = Path(path)
    with atomic_write(path) as f:
        for record in candidates.history:
            f.write(json.dumps(record, separators=(',', ':')) + "\n")
    logger.info(f"Wrote {len(candidates.history)} merge steps to {path}")
    return path


def generate_rgbd_masks(scene: Scene, partition: SuperpointPartition, config: PipelineConfig,
                        pool: Optional[Executor] = None,
                        progress: bool = False) -> RGBDProposals:
    """
    Produce the surviving RGBD-based masks of a scene.

    Boxes are processed concurrently when a pool is given; results are
    gathered in (frame id, detection index) order before the sequential
    merge, so the output does not depend on scheduling.

    Args:
        scene (Scene): Loaded scene with clipped detections
        partition (SuperpointPartition): Superpoints of scene.cloud
        config (PipelineConfig): Thresholds and strides
        pool (Executor, optional): Worker pool for per-box work
        progress (bool): Show a progress bar

    Returns:
        RGBDProposals: Surviving masks, all candidates and box counters
    """
    work: List[Tuple[DetectionBox, Frame]] = []
    for frame in scene.frames:
        for box in sorted(scene.detections_for(frame.frame_id), key=lambda b: b.order):
            work.append((box, frame))

    def _run(item):
        box, frame = item
        return _coarse_mask_for_box(box, frame, scene, partition, config)

    results = map(_run, work) if pool is None else pool.map(_run, work)
    outcomes = list(tqdm(results, total=len(work), desc="Lifting boxes", unit="box", disable=not progress))

    per_frame: Dict[int, List[CoarseMask]] = {frame.frame_id: [] for frame in scene.frames}
    for (box, frame), outcome in zip(work, outcomes):
        if outcome.mask is not None:
            per_frame[frame.frame_id].append(outcome.mask)

    candidates = merge_coarse_masks([per_frame[fid] for fid in scene.frames.frame_ids], config.tau_merge)
    survivors = filter_rgbd_masks(candidates, scene.point_masks, config.tau_filter)

    statuses = [o.status for o in outcomes]
    result = RGBDProposals(
        masks=survivors,
        candidates=candidates,
        boxes_total=len(work),
        boxes_skipped=statuses.count('skipped'),
        boxes_redundant=statuses.count('redundant'),
        coarse_masks=statuses.count('ok'),
    )
    logger.info(
        f"RGBD masks: {result.coarse_masks} coarse masks from {result.boxes_total} boxes, "
        f"{len(candidates)} candidates, {len(survivors)} kept after point-mask filtering"
    )
    return result
