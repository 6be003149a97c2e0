"""
Metric Spaces for fairkc

This module builds the finite metric spaces every solver works on. A space
is stored as a dense, read-only n x n matrix of float64 distances, built
either from Euclidean coordinates or from shortest paths in a weighted
graph. Points are dense 0-based indices everywhere in the library.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import floyd_warshall
from scipy.spatial.distance import cdist

from fairkc.utils.errors import MetricError
from fairkc.utils.resource_monitor import log_memory_footprint

# Configure logging
logger = logging.getLogger(__name__)

# Exhaustive triangle check is used up to this many points
EXHAUSTIVE_CHECK_LIMIT = 200


@dataclass(frozen=True)
class MetricSpace:
    """
    Finite metric space with a precomputed distance matrix

    Attributes:
        distances: Symmetric n x n matrix with zero diagonal (read-only)
        coordinates: n x d point coordinates when built from Euclidean points
    """
    distances: np.ndarray
    coordinates: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.distances.shape[0]

    def d(self, u: int, v: int) -> float:
        """Distance between points u and v"""
        return float(self.distances[u, v])

    def check_index(self, index: int) -> None:
        if not 0 <= index < self.n:
            raise MetricError(f"Point index {index} out of range [0, {self.n})")

    def check_invariants(self, samples: int = 10000, seed: int = 0, tolerance: float = 0.0) -> None:
        """
        Verify zero diagonal, symmetry and the triangle inequality

        Args:
            samples: Number of random triples checked when n exceeds the exhaustive limit
            seed: Seed for the triple sampler
            tolerance: Absolute slack allowed on the triangle inequality

        Raises:
            MetricError: On the first violated invariant
        """
        dist = self.distances
        if np.any(np.diag(dist) != 0):
            raise MetricError("Distance matrix has a non-zero diagonal")
        if not np.array_equal(dist, dist.T):
            raise MetricError("Distance matrix is not symmetric")
        if np.any(dist < 0):
            raise MetricError("Distance matrix has negative entries")

        if self.n <= EXHAUSTIVE_CHECK_LIMIT:
            for v in range(self.n):
                # d(u, w) <= d(u, v) + d(v, w) for every u, w
                via = dist[:, v, None] + dist[None, v, :]
                bad = np.argwhere(dist > via + tolerance)
                if bad.size:
                    u, w = bad[0]
                    raise MetricError(f"Triangle inequality fails for ({u}, {v}, {w})")
            return

        rng = np.random.default_rng(seed)
        triples = rng.integers(0, self.n, size=(samples, 3))
        u, v, w = triples[:, 0], triples[:, 1], triples[:, 2]
        bad = np.flatnonzero(dist[u, w] > dist[u, v] + dist[v, w] + tolerance)
        if bad.size:
            i = bad[0]
            raise MetricError(f"Triangle inequality fails for ({u[i]}, {v[i]}, {w[i]})")


@dataclass(frozen=True)
class Community:
    """A non-empty subset of points together with its exact diameter"""
    members: Tuple[int, ...]
    diameter: float

    def __len__(self) -> int:
        return len(self.members)


def _freeze(distances: np.ndarray, coordinates: Optional[np.ndarray] = None) -> MetricSpace:
    distances = np.ascontiguousarray(distances, dtype=np.float64)
    distances.setflags(write=False)
    if coordinates is not None:
        coordinates.setflags(write=False)
    log_memory_footprint(f"distance matrix ({distances.shape[0]} points)", distances.nbytes)
    return MetricSpace(distances=distances, coordinates=coordinates)


def build_euclidean(points: Sequence[Sequence[float]]) -> MetricSpace:
    """
    Build a metric space from Euclidean coordinates

    Args:
        points: Non-empty list of equal-length real vectors

    Returns:
        MetricSpace with L2 distances and the coordinates attached

    Raises:
        MetricError: For empty input or mixed dimensions
    """
    if len(points) == 0:
        raise MetricError("Cannot build a metric space from zero points")

    dims = {len(p) for p in points}
    if len(dims) != 1:
        raise MetricError(f"Points have mixed dimensions: {sorted(dims)}")
    if 0 in dims:
        raise MetricError("Points must have at least one coordinate")

    coords = np.array(points, dtype=np.float64)
    distances = cdist(coords, coords, metric="euclidean")
    # cdist computes each pair independently; pin the exact invariants
    np.fill_diagonal(distances, 0.0)
    distances = np.minimum(distances, distances.T)

    logger.debug(f"Built Euclidean space: n={coords.shape[0]}, dim={coords.shape[1]}")
    return _freeze(distances, coords)


def build_from_graph(n: int, edges: Iterable[Tuple[int, int, float]]) -> MetricSpace:
    """
    Build the shortest-path metric of an undirected weighted graph

    Endpoints are 1-indexed. When an edge is listed more than once the
    cheapest cost is kept.

    Args:
        n: Number of vertices
        edges: (u, v, cost) triples with positive costs

    Returns:
        MetricSpace of all-pairs shortest-path distances

    Raises:
        MetricError: For invalid endpoints, non-positive costs, self loops or a disconnected graph
    """
    if n < 1:
        raise MetricError(f"Vertex count must be positive, got {n}")

    graph = np.full((n, n), np.inf)
    np.fill_diagonal(graph, 0.0)

    for u, v, cost in edges:
        if not (1 <= u <= n and 1 <= v <= n):
            raise MetricError(f"Edge ({u}, {v}) has an endpoint outside [1, {n}]")
        if u == v:
            raise MetricError(f"Self loop on vertex {u}")
        if not cost > 0:
            raise MetricError(f"Edge ({u}, {v}) has non-positive cost {cost}")
        i, j = u - 1, v - 1
        cheapest = min(graph[i, j], float(cost))
        graph[i, j] = graph[j, i] = cheapest

    distances = floyd_warshall(graph, directed=False)
    if np.isinf(distances).any():
        unreachable = int(np.argwhere(np.isinf(distances))[0][1]) + 1
        raise MetricError(f"Graph is disconnected: vertex {unreachable} is unreachable from some vertex")

    np.fill_diagonal(distances, 0.0)
    distances = np.minimum(distances, distances.T)

    logger.debug(f"Built graph metric: n={n}")
    return _freeze(distances)


def random_euclidean(n: int, dim: int = 2, seed: int = 0, scale: float = 1.0) -> MetricSpace:
    """Uniform random points in [0, scale]^dim from a seeded generator"""
    if n < 1 or dim < 1:
        raise MetricError(f"Need n >= 1 and dim >= 1, got n={n}, dim={dim}")
    rng = np.random.default_rng(seed)
    return build_euclidean(rng.uniform(0.0, scale, size=(n, dim)).tolist())


def _member_array(space: MetricSpace, members: Iterable[int]) -> np.ndarray:
    idx = np.array(sorted(set(int(m) for m in members)), dtype=np.int64)
    if idx.size == 0:
        raise MetricError("Member set is empty")
    if idx[0] < 0 or idx[-1] >= space.n:
        raise MetricError(f"Member indices must lie in [0, {space.n})")
    return idx


def diameter(space: MetricSpace, members: Iterable[int]) -> float:
    """
    Exact diameter of a point subset

    Raises:
        MetricError: For an empty set or invalid indices
    """
    idx = _member_array(space, members)
    return float(space.distances[np.ix_(idx, idx)].max())


def make_community(space: MetricSpace, members: Iterable[int]) -> Community:
    idx = _member_array(space, members)
    return Community(members=tuple(int(i) for i in idx),
                     diameter=float(space.distances[np.ix_(idx, idx)].max()))


def ball(space: MetricSpace, center: int, radius: float) -> List[int]:
    """Sorted indices of the closed ball of the given radius around center"""
    space.check_index(center)
    return np.flatnonzero(space.distances[center] <= radius).tolist()
