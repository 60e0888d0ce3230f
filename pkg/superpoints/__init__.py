"""
Superpoints Package
k-NN graph construction and graph-based oversegmentation
"""

from .graph import WeightedGraph, build_knn_graph
from .segmentation import segment_graph, compute_superpoints, validate_partition

__all__ = ['WeightedGraph', 'build_knn_graph', 'segment_graph', 'compute_superpoints', 'validate_partition']
