"""
Graph-Based Segmentation
Felzenszwalb-Huttenlocher merging over a weighted point graph
"""

import logging
from typing import Optional

import networkx as nx
import numpy as np

from scene_io.types import ScenePointCloud, SuperpointPartition
from superpoints.graph import WeightedGraph, build_knn_graph

logger = logging.getLogger(__name__)


class DisjointSet:
    """Union-find over 0..n-1 with path compression and union by size"""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.internal = [0.0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int, weight: float = 0.0) -> int:
        """Merge the sets rooted at a and b; returns the new root."""
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        self.internal[a] = max(self.internal[a], self.internal[b], weight)
        return a

    def labels(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(len(self.parent))], dtype=np.int64)


def segment_graph(graph: WeightedGraph, granularity: float, min_segment_size: int = 1) -> SuperpointPartition:
    """
    Oversegment a graph into connected superpoints.

    Edges are visited by ascending weight (ties by (u, v)); two components
    merge when the edge weight does not exceed either component's internal
    difference plus granularity / size. Components below min_segment_size
    are then absorbed along the lightest remaining edges.

    Args:
        graph (WeightedGraph): Point graph
        granularity (float): Larger values give larger segments
        min_segment_size (int): Minimum points per segment

    Returns:
        SuperpointPartition: Segment ids ordered by minimum member index
    """
    if granularity <= 0:
        raise ValueError(f"granularity must be positive, got {granularity}")

    order = np.lexsort((graph.v, graph.u, graph.weight))
    us = graph.u[order].tolist()
    vs = graph.v[order].tolist()
    ws = graph.weight[order].tolist()

    forest = DisjointSet(graph.node_count)
    for a, b, w in zip(us, vs, ws):
        root_a = forest.find(a)
        root_b = forest.find(b)
        if root_a == root_b:
            continue
        threshold_a = forest.internal[root_a] + granularity / forest.size[root_a]
        threshold_b = forest.internal[root_b] + granularity / forest.size[root_b]
        if w <= min(threshold_a, threshold_b):
            forest.union(root_a, root_b, w)

    if min_segment_size > 1:
        for a, b, w in zip(us, vs, ws):
            root_a = forest.find(a)
            root_b = forest.find(b)
            if root_a == root_b:
                continue
            if forest.size[root_a] < min_segment_size or forest.size[root_b] < min_segment_size:
                forest.union(root_a, root_b, w)

    partition = SuperpointPartition.from_labels(forest.labels())
    logger.info(f"Segmented {graph.node_count} nodes into {partition.segment_count} superpoints")
    return partition


def compute_superpoints(cloud: ScenePointCloud, granularity: float, knn: int,
                        min_segment_size: int, workers: int = 1) -> SuperpointPartition:
    """Build the k-NN graph and segment it."""
    graph = build_knn_graph(cloud, knn, workers=workers)
    return segment_graph(graph, granularity, min_segment_size)


def validate_partition(partition: SuperpointPartition, graph: Optional[WeightedGraph] = None) -> bool:
    """
    Check disjoint cover of [0, N) and, given the source graph, segment connectivity.

    Args:
        partition (SuperpointPartition): Partition to check
        graph (WeightedGraph, optional): Graph the partition came from

    Returns:
        bool: True if every check passes
    """
    n = partition.point_count
    covered = np.concatenate(partition.members) if partition.members else np.zeros(0, dtype=np.int64)
    if covered.size != n or not np.array_equal(np.sort(covered), np.arange(n)):
        logger.warning("Partition members do not form a disjoint cover")
        return False
    for segment_id, members in enumerate(partition.members):
        if not np.all(partition.segment_of[members] == segment_id):
            logger.warning(f"Segment {segment_id} disagrees with segment_of")
            return False

    if graph is not None:
        same = partition.segment_of[graph.u] == partition.segment_of[graph.v]
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(zip(graph.u[same].tolist(), graph.v[same].tolist()))
        components = nx.number_connected_components(g)
        if components != partition.segment_count:
            logger.warning(f"{components} connected pieces for {partition.segment_count} segments")
            return False
    return True
