"""
Fair Expansion of k-Center Clusterings for fairkc

This module turns any base clustering into a pairwise-fair,
community-preserving one. Each base cluster i gets an independent
exponential draw X_i with rate lambda = 1 / (psi * R). Clusters are then
processed one by one (in a uniformly random order by default), and cluster
i captures every still-unclustered point within R_i + X_i of its original
center. When the original center was already captured by an earlier
cluster, the captured point that minimises the cluster radius becomes the
new center. Clusters that capture nothing stay empty.

The geometry is vectorised over batches of trials; a single realisation is
a batch of one, so batched and one-off results are identical.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from fairkc.metric import MetricSpace
from fairkc.unfair import Clustering, solve
from fairkc.utils.errors import FairAlgError, SolverError

# Configure logging
logger = logging.getLogger(__name__)


class OrderPolicy(str, Enum):
    """How base clusters are ordered before growing"""
    GIVEN = "given"
    UNIFORM_RANDOM = "uniform_random"


@dataclass(frozen=True)
class FairConfig:
    """
    Randomisation parameters of the fair expansion

    Attributes:
        psi: User constant; the draws have mean psi * R
        order_policy: Processing order of the base clusters
        rng_seed: Master seed for per-trial random streams
    """
    psi: float = 1.0
    order_policy: OrderPolicy = OrderPolicy.UNIFORM_RANDOM
    rng_seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.psi) and self.psi > 0):
            raise FairAlgError(f"psi must be a positive finite number, got {self.psi}")
        try:
            object.__setattr__(self, "order_policy", OrderPolicy(self.order_policy))
        except ValueError:
            raise FairAlgError(f"Unknown order policy '{self.order_policy}'")

    @classmethod
    def from_lambda_scale(cls, scale: float, order_policy: OrderPolicy = OrderPolicy.UNIFORM_RANDOM,
                          rng_seed: int = 0) -> "FairConfig":
        """Config for lambda = scale / R, i.e. psi = 1 / scale"""
        if not scale > 0:
            raise FairAlgError(f"Lambda scale must be positive, got {scale}")
        return cls(psi=1.0 / scale, order_policy=order_policy, rng_seed=rng_seed)

    def delta(self, base_radius: float) -> float:
        """The fairness distance scale psi * R"""
        return self.psi * base_radius

    def rate(self, base_radius: float) -> float:
        """Exponential rate lambda = 1 / (psi * R); infinite when R is 0"""
        delta = self.delta(base_radius)
        return np.inf if delta == 0 else 1.0 / delta


@dataclass(frozen=True)
class ExpandedClustering:
    """
    One realisation of the fair expansion

    Cluster indices match the base clustering. Empty clusters have center -1
    and radius 0.

    Attributes:
        order: Base cluster indices in processing order
        draws: X_i for every base cluster i
        labels: Final cluster index of every point
        final_centers: c'_i for every cluster, -1 when empty
        final_radii: Largest c'_i-to-member distance per cluster
        max_radius: Largest final radius
    """
    order: np.ndarray
    draws: np.ndarray
    labels: np.ndarray
    final_centers: np.ndarray
    final_radii: np.ndarray
    max_radius: float

    @property
    def k(self) -> int:
        return self.final_centers.size

    @property
    def assignment(self) -> np.ndarray:
        return self.labels

    @property
    def non_empty(self) -> np.ndarray:
        return np.flatnonzero(self.final_centers >= 0)

    @property
    def clusters(self) -> List[np.ndarray]:
        return [np.flatnonzero(self.labels == i) for i in range(self.k)]

    def validate(self, space: MetricSpace, base: Clustering) -> None:
        """
        Check every structural invariant of the expansion

        Raises:
            FairAlgError: On the first violated invariant
        """
        dist = space.distances
        centers = np.asarray(base.centers)
        reach = base.per_cluster_radius + self.draws
        points = np.arange(space.n)

        if self.labels.shape != (space.n,) or self.labels.min() < 0 or self.labels.max() >= self.k:
            raise FairAlgError("Some point is not in exactly one cluster")
        occupied = np.zeros(self.k, dtype=bool)
        occupied[self.labels] = True
        if not np.array_equal(occupied, self.final_centers >= 0):
            raise FairAlgError("Empty and non-empty clusters disagree with their centers")
        if np.any(self.labels[self.final_centers[occupied]] != np.flatnonzero(occupied)):
            raise FairAlgError("A final center lies outside its own cluster")

        if np.any(dist[centers[self.labels], points] > reach[self.labels]):
            raise FairAlgError("A point was captured beyond R_i + X_i of its original center")

        position = np.empty(self.k, dtype=np.int64)
        position[self.order] = np.arange(self.k)
        # earlier[j, p]: cluster j was processed before the cluster that took p
        earlier = position[:, None] < position[self.labels][None, :]
        within = dist[centers] <= reach[:, None]
        if np.any(earlier & within):
            raise FairAlgError("A point lies within reach of a cluster processed earlier")

        if np.any(self.final_radii[occupied] > 2 * reach[occupied]):
            raise FairAlgError("A final radius exceeds 2 (R_i + X_i)")


@dataclass(frozen=True)
class ExpansionBatch:
    """Fair expansions of B trials sharing one base clustering"""
    orders: np.ndarray
    draws: np.ndarray
    labels: np.ndarray
    final_centers: np.ndarray
    final_radii: np.ndarray

    @property
    def max_radii(self) -> np.ndarray:
        return self.final_radii.max(axis=1)

    @property
    def cluster_counts(self) -> np.ndarray:
        return (self.final_centers >= 0).sum(axis=1)

    def validate(self, space: MetricSpace, base: Clustering) -> None:
        """Check the expansion invariants of every trial in the batch"""
        for b in range(self.labels.shape[0]):
            try:
                self.realisation(b).validate(space, base)
            except FairAlgError as e:
                raise FairAlgError(f"Trial {b} of the batch: {e.message}")

    def realisation(self, b: int) -> ExpandedClustering:
        return ExpandedClustering(
            order=self.orders[b],
            draws=self.draws[b],
            labels=self.labels[b],
            final_centers=self.final_centers[b],
            final_radii=self.final_radii[b],
            max_radius=float(self.final_radii[b].max()),
        )


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent random stream for one trial, derived from (master_seed, trial_index)"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(trial_index,))))


def expansion_from_uniform(rate: float, u):
    """
    Inverse-transform map from U in (0, 1] to an exponential draw

    Args:
        rate: Exponential rate lambda > 0 (may be infinite)
        u: Uniform value(s) in (0, 1]

    Returns:
        -ln(u) / rate, with the same shape as u
    """
    if not rate > 0:
        raise FairAlgError(f"Exponential rate must be positive, got {rate}")
    # + 0.0 turns -0.0 (from u == 1) into 0.0
    return -np.log(u) / rate + 0.0


def sample_expansion(rate: float, rng: np.random.Generator) -> float:
    """Draw one exponential radius expansion with the given rate"""
    u = 1.0 - rng.random()
    return float(expansion_from_uniform(rate, u))


def sample_expansions(rate: float, size: int, rng: np.random.Generator) -> np.ndarray:
    u = 1.0 - rng.random(size)
    return expansion_from_uniform(rate, u)


def draw_trial(base: Clustering, config: FairConfig, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw the processing order and expansions for one trial

    The permutation is drawn first (uniform_random only), then one draw per
    base cluster in cluster-index order.
    """
    k = base.k
    if config.order_policy is OrderPolicy.UNIFORM_RANDOM:
        order = rng.permutation(k)
    else:
        order = np.arange(k)
    draws = sample_expansions(config.rate(base.max_radius), k, rng)
    return order, draws


def _radius_minimising_center(dist: np.ndarray, members: np.ndarray) -> int:
    eccentricity = dist[np.ix_(members, members)].max(axis=1)
    return int(members[np.argmin(eccentricity)])


def expand_batch(space: MetricSpace, base: Clustering, orders: np.ndarray, draws: np.ndarray) -> ExpansionBatch:
    """
    Grow the base clusters for a batch of trials

    Args:
        space: Metric space
        base: Base clustering (not re-validated here)
        orders: (B, k) processing orders
        draws: (B, k) expansions X_i indexed by base cluster

    Returns:
        ExpansionBatch with labels, final centers and final radii per trial
    """
    dist = space.distances
    n = space.n
    batch, k = orders.shape
    centers = np.asarray(base.centers)
    radii = base.per_cluster_radius
    rows = np.arange(batch)

    labels = np.full((batch, n), -1, dtype=np.int64)
    final_centers = np.full((batch, k), -1, dtype=np.int64)

    for step in range(k):
        cluster = orders[:, step]
        center = centers[cluster]
        reach = radii[cluster] + draws[rows, cluster]

        unclustered = labels < 0
        center_free = unclustered[rows, center]
        capture = unclustered & (dist[center] <= reach[:, None])
        labels = np.where(capture, cluster[:, None], labels)

        final_centers[rows[center_free], cluster[center_free]] = center[center_free]
        for b in np.flatnonzero(~center_free):
            members = np.flatnonzero(capture[b])
            if members.size:
                final_centers[b, cluster[b]] = _radius_minimising_center(dist, members)

    # Every point sits within R_i of its own base center, so nothing is left over
    center_of_point = np.take_along_axis(final_centers, labels, axis=1)
    reach = dist[center_of_point, np.arange(n)[None, :]]
    final_radii = np.zeros((batch, k))
    np.maximum.at(final_radii, (rows[:, None].repeat(n, axis=1), labels), reach)

    return ExpansionBatch(orders=orders, draws=draws, labels=labels,
                          final_centers=final_centers, final_radii=final_radii)


def check_base(space: MetricSpace, base: Clustering) -> None:
    try:
        base.validate(space)
    except SolverError as e:
        raise FairAlgError(f"Inconsistent base clustering: {e.message}")


def fair_assign(space: MetricSpace, base: Clustering, config: FairConfig,
                rng: Optional[np.random.Generator] = None) -> ExpandedClustering:
    """
    Run the fair expansion once on a base clustering

    Args:
        space: Metric space
        base: Valid base clustering over space
        config: Fair parameters
        rng: Random stream; defaults to trial 0 of config.rng_seed

    Returns:
        ExpandedClustering realisation

    Raises:
        FairAlgError: When the base clustering does not match the space
    """
    check_base(space, base)
    if rng is None:
        rng = trial_rng(config.rng_seed, 0)
    order, draws = draw_trial(base, config, rng)
    return expand_batch(space, base, order[None, :], draws[None, :]).realisation(0)


def fair_solve(space: MetricSpace, k: int, base_algorithm: str, config: FairConfig,
               rng: Optional[np.random.Generator] = None, workers: int = 1) -> ExpandedClustering:
    """
    Solve classically with the named algorithm, then expand fairly

    Args:
        space: Metric space
        k: Number of centers
        base_algorithm: gonz1, gonzplus, scr or bruteforce
        config: Fair parameters
        rng: Random stream; defaults to trial 0 of config.rng_seed
        workers: Threads for the base solver
    """
    base = solve(space, k, base_algorithm, workers=workers)
    expanded = fair_assign(space, base, config, rng)
    logger.debug(f"Fair expansion over {base_algorithm}: {expanded.non_empty.size} clusters, "
                 f"radius {expanded.max_radius:g} (base {base.max_radius:g})")
    return expanded
