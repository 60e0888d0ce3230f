"""
Fusion Package
RGBD-based mask proposals from lifted boxes, fused with point-based masks
"""

from .proposals import (
    CoarseMask, CandidateSet, Proposal, RGBDProposals,
    filter_redundant_boxes, assign_superpoints, merge_coarse_masks,
    filter_rgbd_masks, fuse_proposals, generate_rgbd_masks, save_candidate_history,
)

__all__ = [
    'CoarseMask', 'CandidateSet', 'Proposal', 'RGBDProposals',
    'filter_redundant_boxes', 'assign_superpoints', 'merge_coarse_masks',
    'filter_rgbd_masks', 'fuse_proposals', 'generate_rgbd_masks', 'save_candidate_history',
]
