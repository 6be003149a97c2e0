"""
Classical k-Center Solvers for fairkc

This module provides the "unfair" solvers used as step 1 of the fair
expansion and as experimental baselines:

- gonzalez: farthest-first traversal from a given start point (Gonz1 starts at 0)
- gonzalez_best_start: best farthest-first traversal over every start (Gonz+)
- scr: greedy dominating sets on bottleneck graphs, scanning radii upwards
- optimal_bruteforce: exhaustive search, a desk-scale oracle

All tie-breaks resolve to the lowest point index, so every solver is
deterministic.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from fairkc import config
from fairkc.metric import MetricSpace
from fairkc.utils.errors import SolverError

# Configure logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Clustering:
    """
    A base k-center solution

    Attributes:
        centers: Center point of each cluster, in cluster order
        assignment: Cluster index of every point
        per_cluster_radius: R_i, the largest center-to-member distance of cluster i
        max_radius: R, the largest R_i
    """
    centers: tuple
    assignment: np.ndarray
    per_cluster_radius: np.ndarray
    max_radius: float

    @property
    def k(self) -> int:
        return len(self.centers)

    def members(self, cluster: int) -> List[int]:
        return np.flatnonzero(self.assignment == cluster).tolist()

    def validate(self, space: MetricSpace) -> None:
        """
        Check the clustering against its metric space

        Raises:
            SolverError: When assignment, centers or radii are inconsistent
        """
        if self.assignment.shape != (space.n,):
            raise SolverError(f"Assignment covers {self.assignment.size} points, space has {space.n}")
        if self.k == 0 or len(set(self.centers)) != self.k:
            raise SolverError("Centers must be non-empty and distinct")
        if self.assignment.min() < 0 or self.assignment.max() >= self.k:
            raise SolverError("Assignment refers to a cluster that does not exist")
        for i, c in enumerate(self.centers):
            if self.assignment[c] != i:
                raise SolverError(f"Center {c} is not assigned to its own cluster {i}")
        radii = _cluster_radii(space, self.centers, self.assignment)
        if not np.array_equal(radii, self.per_cluster_radius):
            raise SolverError("Stored per-cluster radii do not match the assignment")
        if float(radii.max()) != self.max_radius:
            raise SolverError("Stored max radius does not match the assignment")


def _cluster_radii(space: MetricSpace, centers: Sequence[int], assignment: np.ndarray) -> np.ndarray:
    center_of_point = np.asarray(centers)[assignment]
    reach = space.distances[center_of_point, np.arange(space.n)]
    radii = np.zeros(len(centers))
    np.maximum.at(radii, assignment, reach)
    return radii


def _check_k(space: MetricSpace, k: int) -> None:
    if not 1 <= k <= space.n:
        raise SolverError(f"k must lie in [1, {space.n}], got {k}")


def assign_to_nearest(space: MetricSpace, centers: Sequence[int]) -> Clustering:
    """
    Assign every point to its nearest center

    Ties go to the lowest cluster index; a center always belongs to its own
    cluster, even when another center sits at distance 0.

    Args:
        space: Metric space
        centers: Distinct center indices, in cluster order

    Returns:
        Clustering with radii computed from the assignment

    Raises:
        SolverError: For an empty, repeated or out-of-range center list
    """
    centers = tuple(int(c) for c in centers)
    if not centers:
        raise SolverError("Center list is empty")
    if len(set(centers)) != len(centers):
        raise SolverError(f"Centers are not distinct: {centers}")
    for c in centers:
        if not 0 <= c < space.n:
            raise SolverError(f"Center {c} out of range [0, {space.n})")

    # np.argmin returns the first minimum, i.e. the lowest cluster index
    assignment = np.argmin(space.distances[:, centers], axis=1)
    assignment[list(centers)] = np.arange(len(centers))

    radii = _cluster_radii(space, centers, assignment)
    return Clustering(
        centers=centers,
        assignment=assignment,
        per_cluster_radius=radii,
        max_radius=float(radii.max()),
    )


def _farthest_first(space: MetricSpace, k: int, seeds: Sequence[int]) -> List[int]:
    """Extend seeds to k centers by farthest-first traversal"""
    centers = list(seeds)
    nearest = space.distances[:, centers].min(axis=1)
    nearest[centers] = -1.0
    while len(centers) < k:
        nxt = int(np.argmax(nearest))
        centers.append(nxt)
        nearest = np.minimum(nearest, space.distances[nxt])
        nearest[centers] = -1.0
    return centers


def gonzalez(space: MetricSpace, k: int, start: int = 0) -> Clustering:
    """
    Farthest-first traversal (Gonzalez) from a fixed start point

    Args:
        space: Metric space
        k: Number of centers, 1 <= k <= n
        start: First center

    Returns:
        Clustering whose radius is at most twice the optimum
    """
    _check_k(space, k)
    space.check_index(start)
    return assign_to_nearest(space, _farthest_first(space, k, [start]))


def gonzalez_best_start(space: MetricSpace, k: int, workers: int = 1) -> Clustering:
    """
    Run farthest-first traversal from every start point and keep the best

    The smallest max radius wins, ties to the lowest start index, so the
    result does not depend on the number of workers.

    Args:
        space: Metric space
        k: Number of centers
        workers: Threads used to evaluate start points

    Returns:
        The best of the n Gonzalez clusterings
    """
    _check_k(space, k)
    starts = range(space.n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda s: gonzalez(space, k, s), starts))
    else:
        results = [gonzalez(space, k, s) for s in starts]

    best = min(range(len(results)), key=lambda s: (results[s].max_radius, s))
    logger.debug(f"Gonz+ picked start {best} with radius {results[best].max_radius}")
    return results[best]


def _greedy_dominating_set(adjacency: np.ndarray, limit: int) -> Optional[List[int]]:
    """
    Greedy dominating set on a bottleneck graph

    Repeatedly picks the vertex whose closed neighbourhood covers the most
    uncovered vertices (lowest index on ties). Stops early once the set
    grows past limit and returns None.
    """
    n = adjacency.shape[0]
    uncovered = np.ones(n, dtype=bool)
    scores = adjacency.sum(axis=1, dtype=np.int64)
    chosen: List[int] = []

    while uncovered.any():
        if len(chosen) >= limit:
            return None
        v = int(np.argmax(scores))
        chosen.append(v)
        newly = adjacency[v] & uncovered
        uncovered &= ~newly
        # Each newly covered vertex no longer counts for any neighbour
        scores -= adjacency[:, newly].sum(axis=1, dtype=np.int64)
    return chosen


def scr(space: MetricSpace, k: int) -> Clustering:
    """
    Dominating-set heuristic on bottleneck graphs

    Candidate radii are the distinct distances in increasing order. For each
    candidate r the bottleneck graph G_r (u ~ v iff d(u, v) <= r) gets a
    greedy dominating set; the first r certified with at most k vertices
    wins. A set smaller than k is topped up by farthest-first traversal.

    Closed-neighbourhood sizes are kept up to date while edges are added in
    distance order. A candidate whose k largest neighbourhoods cover fewer
    than n vertices has no dominating set of size k and is skipped without
    building G_r.

    Args:
        space: Metric space
        k: Number of centers

    Returns:
        Clustering built on the certified dominating set
    """
    _check_k(space, k)
    dist = space.distances
    n = space.n
    candidates = np.unique(dist)

    # No candidate below the optimum can be certified; the optimum is at
    # least half the Gonzalez radius, so skipping those candidates changes nothing
    lower = gonzalez(space, k, 0).max_radius / 2.0
    first = int(np.searchsorted(candidates, lower, side="left"))

    pair_u, pair_v = np.triu_indices(n, k=1)
    pair_d = dist[pair_u, pair_v]
    by_distance = np.argsort(pair_d, kind="stable")
    pair_u, pair_v, pair_d = pair_u[by_distance], pair_v[by_distance], pair_d[by_distance]

    degree = np.ones(n, dtype=np.int64)
    added = 0
    skipped = 0
    for r in candidates[first:]:
        stop = int(np.searchsorted(pair_d, r, side="right"))
        if stop > added:
            degree += np.bincount(pair_u[added:stop], minlength=n)
            degree += np.bincount(pair_v[added:stop], minlength=n)
            added = stop
        if np.partition(degree, n - k)[n - k:].sum() < n:
            skipped += 1
            continue

        dominating = _greedy_dominating_set(dist <= r, k)
        if dominating is not None:
            logger.debug(f"Scr certified radius {r} with {len(dominating)} centers "
                         f"({skipped} candidates ruled out by neighbourhood sizes)")
            centers = _farthest_first(space, k, dominating)
            return assign_to_nearest(space, centers)

    # Unreachable: at the largest distance any single vertex dominates G_r
    raise SolverError("Scr found no feasible radius")


def optimal_bruteforce(space: MetricSpace, k: int, chunk_size: int = 4096) -> Clustering:
    """
    Exact k-center optimum by exhaustive enumeration of center sets

    Among optimal center sets the lexicographically first is returned.

    Raises:
        SolverError: When C(n, k) exceeds the configured limit
    """
    _check_k(space, k)
    total = math.comb(space.n, k)
    if total > config.BRUTEFORCE_LIMIT:
        raise SolverError(f"Instance too large for exhaustive search: C({space.n}, {k}) = {total}")

    dist = space.distances
    combos = itertools.combinations(range(space.n), k)
    best_radius = math.inf
    best_centers = None

    while True:
        chunk = np.array(list(itertools.islice(combos, chunk_size)), dtype=np.int64)
        if chunk.size == 0:
            break
        # (n, m, k) -> nearest-center distance per point -> radius per center set
        radii = dist[:, chunk].min(axis=2).max(axis=0)
        i = int(np.argmin(radii))
        if radii[i] < best_radius:
            best_radius = float(radii[i])
            best_centers = chunk[i].tolist()

    logger.debug(f"Exhaustive optimum over {total} center sets: {best_radius}")
    return assign_to_nearest(space, best_centers)


SOLVERS: Dict[str, Callable[[MetricSpace, int], Clustering]] = {
    "gonz1": lambda space, k: gonzalez(space, k, 0),
    "gonzplus": gonzalez_best_start,
    "scr": scr,
    "bruteforce": optimal_bruteforce,
}


def solve(space: MetricSpace, k: int, algorithm: str, workers: int = 1) -> Clustering:
    """
    Run a classical solver by name

    Args:
        space: Metric space
        k: Number of centers
        algorithm: One of gonz1, gonzplus, scr, bruteforce
        workers: Threads for gonzplus

    Raises:
        SolverError: For an unknown algorithm name or invalid k
    """
    try:
        solver = SOLVERS[algorithm]
    except KeyError:
        raise SolverError(f"Unknown algorithm '{algorithm}'. Choose from: {', '.join(SOLVERS)}")
    if algorithm == "gonzplus":
        clustering = gonzalez_best_start(space, k, workers=workers)
    else:
        clustering = solver(space, k)
    logger.info(f"{algorithm}: k={k}, radius={clustering.max_radius:g}")
    return clustering
