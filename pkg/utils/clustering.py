"""Density-based clustering of stop sign positions."""

from collections import deque
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.spatial.distance import cdist

from utils.validators import Point

NOISE = -1
_UNVISITED = -2


class ClusterAssignment(BaseModel):
    """One label per input point; NOISE or a cluster id in 0..k-1."""
    model_config = ConfigDict(frozen=True)

    labels: Tuple[int, ...]

    @property
    def n_clusters(self) -> int:
        return len({label for label in self.labels if label != NOISE})

    def members(self, label: int) -> List[int]:
        """Input indices carrying ``label``."""
        return [i for i, value in enumerate(self.labels) if value == label]


def _first_appearance(labels: np.ndarray) -> np.ndarray:
    """Renumber cluster ids in order of first appearance over input index."""
    mapping = {}
    out = labels.copy()
    for i, label in enumerate(labels):
        if label == NOISE:
            continue
        if label not in mapping:
            mapping[label] = len(mapping)
        out[i] = mapping[label]
    return out


def dbscan(points: Sequence[Point], eps: float, min_pts: int) -> ClusterAssignment:
    """Cluster points with DBSCAN.

    ``min_pts`` counts the point itself. Neighbourhoods are closed balls of
    radius ``eps``. Clusters grow breadth-first from core points taken in
    input order, so a border point reachable from several clusters joins the
    one that claims it first.

    Args:
        points: 2-D positions
        eps: Neighbourhood radius (m)
        min_pts: Minimum neighbourhood size for a core point

    Returns:
        ClusterAssignment with labels in first-appearance order
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be at least 1")

    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return ClusterAssignment(labels=())

    neighbors = [np.flatnonzero(row <= eps) for row in cdist(pts, pts)]
    is_core = np.array([len(nb) >= min_pts for nb in neighbors])

    labels = np.full(n, _UNVISITED)
    cluster_id = 0
    for seed in range(n):
        if labels[seed] != _UNVISITED or not is_core[seed]:
            continue
        labels[seed] = cluster_id
        queue = deque([seed])
        while queue:
            current = queue.popleft()
            if not is_core[current]:
                continue
            for neighbor in neighbors[current]:
                if labels[neighbor] == _UNVISITED:
                    labels[neighbor] = cluster_id
                    queue.append(neighbor)
        cluster_id += 1

    labels[labels == _UNVISITED] = NOISE
    return ClusterAssignment(labels=tuple(int(v) for v in _first_appearance(labels)))
