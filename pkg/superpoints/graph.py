"""
Point Graph Construction
k-nearest-neighbor graph over the scene point cloud
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.spatial import cKDTree

from scene_io.types import ScenePointCloud

logger = logging.getLogger(__name__)

# extra neighbors queried beyond k so most rows resolve distance ties without a fallback
TIE_MARGIN = 8


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph; edges stored once with u < v, sorted by (u, v)"""
    node_count: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.u.size)

    @property
    def edges(self) -> List[Tuple[int, int, float]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.weight.tolist()))

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "WeightedGraph":
        """
        Build a graph from (u, v, weight) triples.

        Self-loops are rejected; duplicate undirected edges keep the first weight.
        """
        if len(edges) == 0:
            empty = np.zeros(0, dtype=np.int64)
            return cls(node_count, empty, empty.copy(), np.zeros(0))
        table = np.asarray(edges, dtype=np.float64)
        a = table[:, 0].astype(np.int64)
        b = table[:, 1].astype(np.int64)
        weight = table[:, 2]
        if np.any(a == b):
            raise ValueError("self-loops are not allowed")
        if np.any(np.minimum(a, b) < 0) or np.any(np.maximum(a, b) >= node_count):
            raise ValueError("edge endpoint outside [0, node_count)")
        if not np.all(np.isfinite(weight)) or np.any(weight < 0):
            raise ValueError("edge weights must be finite and non-negative")
        return cls._canonical(node_count, a, b, weight)

    @classmethod
    def _canonical(cls, node_count, a, b, weight) -> "WeightedGraph":
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        keys = lo * node_count + hi
        _, first = np.unique(keys, return_index=True)
        first = np.sort(first)
        lo, hi, weight = lo[first], hi[first], weight[first]
        order = np.lexsort((hi, lo))
        return cls(node_count, lo[order], hi[order], np.asarray(weight, dtype=np.float64)[order])


def _edge_weights(cloud: ScenePointCloud, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """1 - max(0, n_u . n_v) with normals, Euclidean distance otherwise."""
    if cloud.has_normals:
        dots = np.einsum('ij,ij->i', cloud.normals[u], cloud.normals[v])
        return 1.0 - np.maximum(0.0, dots)
    return np.linalg.norm(cloud.points[u] - cloud.points[v], axis=1)


def _nearest(points: np.ndarray, i: int, candidates: np.ndarray, k: int) -> np.ndarray:
    """k closest candidates to point i, ties broken by lower index."""
    candidates = candidates[candidates != i]
    distances = np.linalg.norm(points[candidates] - points[i], axis=1)
    order = np.lexsort((candidates, distances))
    return candidates[order[:k]]


def build_knn_graph(cloud: ScenePointCloud, k: int, workers: int = 1) -> WeightedGraph:
    """
    Connect every point to its k nearest Euclidean neighbors.

    Neighbor ties are broken by lower point index, so the graph equals a
    brute-force nearest-neighbor construction exactly.

    Args:
        cloud (ScenePointCloud): Scene points (normals optional)
        k (int): Neighbors per point (k >= N-1 gives the complete graph)
        workers (int): Threads for the KD-tree query

    Returns:
        WeightedGraph: Deduplicated undirected edges
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    points = cloud.points
    n = cloud.point_count
    if n == 1:
        return WeightedGraph.from_edges(1, [])

    k = min(k, n - 1)
    query_count = min(n, k + 1 + TIE_MARGIN)
    tree = cKDTree(points)
    _, indices = tree.query(points, k=query_count, workers=max(1, workers))
    indices = np.asarray(indices, dtype=np.int64).reshape(n, query_count)

    rows = np.arange(n)
    exact = np.linalg.norm(points[indices] - points[rows, None, :], axis=2)
    exact[indices == rows[:, None]] = np.inf

    order = np.lexsort((indices, exact), axis=-1)
    chosen = np.take_along_axis(indices, order[:, :k], axis=1)
    chosen_dist = np.take_along_axis(exact, order[:, :k], axis=1)

    if query_count < n:
        # rows whose k-th distance reaches the edge of the queried window may hide ties
        finite = np.where(np.isfinite(exact), exact, -np.inf)
        window_edge = finite.max(axis=1)
        ambiguous = np.flatnonzero(chosen_dist[:, -1] >= window_edge)
        for i in ambiguous:
            radius = chosen_dist[i, -1]
            candidates = np.asarray(tree.query_ball_point(points[i], radius * (1 + 1e-9) + 1e-12), dtype=np.int64)
            chosen[i] = _nearest(points, int(i), candidates, k)
        if ambiguous.size:
            logger.debug(f"Resolved neighbor ties for {ambiguous.size} points by ball query")

    u = np.repeat(rows, k)
    v = chosen.ravel()
    weight = _edge_weights(cloud, u, v)
    graph = WeightedGraph._canonical(n, u, v, weight)
    logger.info(f"Built {k}-NN graph: {n} nodes, {graph.edge_count} edges")
    return graph
