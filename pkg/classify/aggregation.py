"""
Mask Classification
Top-k view selection, label-map voting and final label assignment
"""

import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fusion.proposals import Proposal
from geometry.projection import ProjectedPoints, VisibilityMatrices, round_pixel
from scene_io.types import BinaryMask3D, LabeledInstance

logger = logging.getLogger(__name__)


@dataclass
class ClassDistribution:
    """Label-map votes collected for one proposal"""
    counts: Dict[int, int] = field(default_factory=dict)
    total_labeled: int = 0
    total_sampled: int = 0

    def winner(self) -> Optional[Tuple[int, int]]:
        """(class_id, count) with the most votes, lowest class on ties; None without votes."""
        if not self.counts:
            return None
        class_id = min(self.counts, key=lambda c: (-self.counts[c], c))
        return class_id, self.counts[class_id]


def visibility_scores(mask: BinaryMask3D, vis: VisibilityMatrices) -> np.ndarray:
    """Number of mask points visible in each frame."""
    visible = vis.frame_vis[:, mask.member_indices] & vis.depth_vis[:, mask.member_indices]
    return visible.sum(axis=1)


def select_topk_frames(mask: BinaryMask3D, vis: VisibilityMatrices, k: int) -> List[int]:
    """
    Frames where the mask is most visible.

    Args:
        mask (BinaryMask3D): Proposal mask
        vis (VisibilityMatrices): Visibility of every point in every frame
        k (int): Maximum number of frames

    Returns:
        list: Up to k frame indices with positive score, best first, lower index on ties
    """
    scores = visibility_scores(mask, vis)
    candidates = np.flatnonzero(scores > 0)
    order = np.lexsort((candidates, -scores[candidates]))
    return candidates[order][:k].tolist()


def aggregate_distribution(mask: BinaryMask3D, proj: ProjectedPoints, vis: VisibilityMatrices,
                           label_maps: Sequence[np.ndarray], topk: Sequence[int]) -> ClassDistribution:
    """
    Sample the label maps at the mask's visible projected pixels.

    Args:
        mask (BinaryMask3D): Proposal mask
        proj (ProjectedPoints): Projected points
        vis (VisibilityMatrices): Visibility bits
        label_maps (list): Label image per frame index
        topk (list): Frame indices from select_topk_frames

    Returns:
        ClassDistribution: Votes over labels >= 0; every sampled pixel counts toward total_sampled
    """
    indices = mask.member_indices
    distribution = ClassDistribution()
    for f in topk:
        visible = indices[vis.frame_vis[f, indices] & vis.depth_vis[f, indices]]
        if visible.size == 0:
            continue
        labels_image = label_maps[f]
        height, width = labels_image.shape
        u = np.clip(round_pixel(proj.pixel_x[f, visible]), 0, width - 1)
        v = np.clip(round_pixel(proj.pixel_y[f, visible]), 0, height - 1)
        sampled = labels_image[v, u]
        distribution.total_sampled += int(sampled.size)
        classes, counts = np.unique(sampled[sampled >= 0], return_counts=True)
        for class_id, count in zip(classes.tolist(), counts.tolist()):
            distribution.counts[class_id] = distribution.counts.get(class_id, 0) + count
            distribution.total_labeled += count
    return distribution


def assign_labels(proposals: Sequence[Proposal], distributions: Sequence[ClassDistribution]) -> List[LabeledInstance]:
    """
    Label each proposal with its most voted class.

    Proposals without a single labeled vote are dropped.

    Args:
        proposals (list): Fused proposals
        distributions (list): One distribution per proposal

    Returns:
        list: LabeledInstance per kept proposal, in proposal order
    """
    if len(proposals) != len(distributions):
        raise ValueError(f"{len(proposals)} proposals but {len(distributions)} distributions")
    instances = []
    for proposal, distribution in zip(proposals, distributions):
        best = distribution.winner()
        if best is None or distribution.total_labeled == 0:
            continue
        class_id, count = best
        instances.append(LabeledInstance(
            mask=proposal.mask,
            class_id=class_id,
            confidence=count / distribution.total_sampled,
            source=proposal.source,
        ))
    dropped = len(proposals) - len(instances)
    if dropped:
        logger.info(f"Dropped {dropped} of {len(proposals)} proposals without label evidence")
    return instances


def classify_proposals(proposals: Sequence[Proposal], proj: ProjectedPoints, vis: VisibilityMatrices,
                       label_maps: Sequence[np.ndarray], top_k: int,
                       pool: Optional[Executor] = None) -> Tuple[List[LabeledInstance], List[ClassDistribution]]:
    """Top-k selection and voting per proposal (in parallel when a pool is given), then labeling."""
    def _distribution(proposal: Proposal) -> ClassDistribution:
        topk = select_topk_frames(proposal.mask, vis, top_k)
        return aggregate_distribution(proposal.mask, proj, vis, label_maps, topk)

    if pool is None:
        distributions = [_distribution(p) for p in proposals]
    else:
        distributions = list(pool.map(_distribution, proposals))
    return assign_labels(proposals, distributions), distributions
