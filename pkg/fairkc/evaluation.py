"""
Fairness Evaluation for fairkc

This module provides the Monte-Carlo trial harness and the three comparison
criteria used to score k-center algorithms:

- radius: mean over trials of the largest cluster radius
- pairwise fairness: empirical separation probability of each nearby pair
  divided by its target bound d(u, v) / R_ref
- community preservation: number of distinct clusters each point-centred
  ball of radius R_ref / 4 is split into

Deterministic algorithms are scored through the same code path as a
single-trial ensemble. Trials run in vectorised batches, optionally on a
thread pool; every trial draws from its own stream derived from
(master_seed, trial_index), so results never depend on the schedule.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from fairkc import config as settings
from fairkc.fair import FairConfig, check_base, draw_trial, expand_batch, trial_rng
from fairkc.metric import MetricSpace, ball, make_community
from fairkc.unfair import Clustering
from fairkc.utils.errors import EvaluationError
from fairkc.utils.resource_monitor import scratch_items

# Configure logging
logger = logging.getLogger(__name__)

# Upper bound on the (batch x communities x clusters) scratch array
_COMMUNITY_SCRATCH_LIMIT = 2 ** 24
# Upper bound on the (batch x pairs) label blocks compared at once
_PAIR_SCRATCH_LIMIT = 2 ** 22


@dataclass(frozen=True)
class EvaluationTargets:
    """
    Pairs and communities every algorithm on an instance is scored against

    Attributes:
        reference_radius: R_ref, normally the Scr radius
        pair_cap: Pairs with d <= pair_cap * R_ref are tracked
        community_divisor: Communities are closed balls of radius R_ref / divisor
        pair_u, pair_v, pair_distance: Tracked pairs with 0 < d
        zero_u, zero_v: Tracked pairs of co-located points
        community_owner, community_point: Flattened (ball center, member) lists
        community_size, community_diameter: Per ball
    """
    n_points: int
    reference_radius: float
    pair_cap: float
    community_divisor: float
    pair_u: np.ndarray
    pair_v: np.ndarray
    pair_distance: np.ndarray
    zero_u: np.ndarray
    zero_v: np.ndarray
    community_owner: np.ndarray
    community_point: np.ndarray
    community_size: np.ndarray
    community_diameter: np.ndarray

    @property
    def community_radius(self) -> float:
        return self.reference_radius / self.community_divisor

    def community_members(self, owner: int) -> np.ndarray:
        return self.community_point[self.community_owner == owner]

    def same_as(self, other: "EvaluationTargets") -> bool:
        if other is self:
            return True
        return (
            self.n_points == other.n_points
            and self.reference_radius == other.reference_radius
            and np.array_equal(self.pair_u, other.pair_u)
            and np.array_equal(self.pair_v, other.pair_v)
            and np.array_equal(self.zero_u, other.zero_u)
            and np.array_equal(self.community_owner, other.community_owner)
            and np.array_equal(self.community_point, other.community_point)
        )


def build_targets(space: MetricSpace, reference_radius: float,
                  pair_cap: float = settings.DEFAULT_PAIR_CAP,
                  community_divisor: float = settings.DEFAULT_COMMUNITY_DIVISOR) -> EvaluationTargets:
    """
    Enumerate tracked pairs and point-centred communities once per instance

    Args:
        space: Metric space
        reference_radius: R_ref used for both targets
        pair_cap: Multiple of R_ref up to which pairs are tracked
        community_divisor: Community radius is R_ref / community_divisor

    Returns:
        EvaluationTargets shared by every algorithm on the instance
    """
    if reference_radius < 0 or pair_cap <= 0 or community_divisor <= 0:
        raise EvaluationError("Reference radius must be non-negative; pair cap and community divisor positive")

    dist = space.distances
    u, v = np.triu_indices(space.n, k=1)
    d = dist[u, v]
    tracked = d <= pair_cap * reference_radius
    zero = tracked & (d == 0)
    positive = tracked & (d > 0)

    community_radius = reference_radius / community_divisor
    communities = [make_community(space, ball(space, p, community_radius)) for p in range(space.n)]
    size = np.array([len(c) for c in communities], dtype=np.int64)
    owner = np.repeat(np.arange(space.n), size)
    point = np.concatenate([c.members for c in communities]).astype(np.int64)
    diameters = np.array([c.diameter for c in communities])

    logger.debug(f"Tracking {int(positive.sum())} pairs ({int(zero.sum())} co-located) "
                 f"and {space.n} communities of mean size {size.mean():.1f}")

    return EvaluationTargets(
        n_points=space.n,
        reference_radius=float(reference_radius),
        pair_cap=float(pair_cap),
        community_divisor=float(community_divisor),
        pair_u=u[positive],
        pair_v=v[positive],
        pair_distance=d[positive],
        zero_u=u[zero],
        zero_v=v[zero],
        community_owner=owner,
        community_point=point,
        community_size=size,
        community_diameter=diameters,
    )


@dataclass
class TrialEnsemble:
    """
    Aggregated statistics over T trials of one algorithm on one instance

    Attributes:
        separation_counts: Trials separating each tracked pair (d > 0)
        zero_separation_counts: Trials separating each co-located pair
        community_histogram: [community, c] = trials in which the community met c distinct clusters
        max_radii: Largest cluster radius of each trial
        max_draws: Largest expansion X_i of each trial (0 for deterministic runs)
        cluster_counts: Non-empty clusters of each trial
    """
    targets: EvaluationTargets
    trial_count: int
    separation_counts: np.ndarray
    zero_separation_counts: np.ndarray
    community_histogram: np.ndarray
    max_radii: np.ndarray
    max_draws: np.ndarray
    cluster_counts: np.ndarray
    master_seed: Optional[int] = None
    first_trial: int = 0

    @property
    def reference_radius(self) -> float:
        return self.targets.reference_radius

    @property
    def community_counts_range(self) -> Tuple[int, int]:
        """Smallest and largest distinct-cluster count seen for any community"""
        seen = np.flatnonzero(self.community_histogram.sum(axis=0))
        return int(seen[0]), int(seen[-1])

    def merge(self, other: "TrialEnsemble") -> "TrialEnsemble":
        """
        Combine two ensembles over the same targets

        Counters add; per-trial arrays are concatenated in order.
        """
        if not self.targets.same_as(other.targets):
            raise EvaluationError("Cannot merge ensembles scored against different targets")
        if self.community_histogram.shape != other.community_histogram.shape:
            raise EvaluationError("Cannot merge ensembles with different cluster counts")
        return TrialEnsemble(
            targets=self.targets,
            trial_count=self.trial_count + other.trial_count,
            separation_counts=self.separation_counts + other.separation_counts,
            zero_separation_counts=self.zero_separation_counts + other.zero_separation_counts,
            community_histogram=self.community_histogram + other.community_histogram,
            max_radii=np.concatenate([self.max_radii, other.max_radii]),
            max_draws=np.concatenate([self.max_draws, other.max_draws]),
            cluster_counts=np.concatenate([self.cluster_counts, other.cluster_counts]),
            master_seed=self.master_seed if self.master_seed == other.master_seed else None,
            first_trial=min(self.first_trial, other.first_trial),
        )


def _distinct_cluster_counts(targets: EvaluationTargets, labels: np.ndarray, k: int) -> np.ndarray:
    """(B, communities) number of distinct clusters met by each community"""
    batch = labels.shape[0]
    n_comm = targets.n_points
    counts = np.empty((batch, n_comm), dtype=np.int64)
    step = max(1, _COMMUNITY_SCRATCH_LIMIT // max(1, n_comm * k))
    for lo in range(0, batch, step):
        sub = labels[lo:lo + step]
        hit = np.zeros((sub.shape[0], n_comm, k), dtype=bool)
        trial = np.arange(sub.shape[0])[:, None]
        hit[trial, targets.community_owner[None, :], sub[:, targets.community_point]] = True
        counts[lo:lo + step] = hit.sum(axis=2)
    return counts


def _separation_counts(labels: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Trials separating each (u, v) pair, gathered over blocks of pairs"""
    counts = np.zeros(u.size, dtype=np.int64)
    batch = labels.shape[0]
    # two gathered label blocks plus the comparison mask per pair
    step = scratch_items(batch * (2 * labels.itemsize + 1), max(1, _PAIR_SCRATCH_LIMIT // batch))
    for lo in range(0, u.size, step):
        hi = lo + step
        counts[lo:hi] = np.count_nonzero(labels[:, u[lo:hi]] != labels[:, v[lo:hi]], axis=0)
    return counts


def ensemble_from_labels(targets: EvaluationTargets, labels: np.ndarray, k: int,
                         max_radii: np.ndarray, cluster_counts: np.ndarray,
                         max_draws: Optional[np.ndarray] = None,
                         master_seed: Optional[int] = None, first_trial: int = 0) -> TrialEnsemble:
    """
    Score a batch of partitions against the targets

    Args:
        targets: Tracked pairs and communities
        labels: (B, n) cluster index of every point in every trial
        k: Number of cluster slots (histogram width is k + 1)
        max_radii: (B,) largest radius per trial
        cluster_counts: (B,) non-empty clusters per trial
        max_draws: (B,) largest expansion per trial, zeros when omitted

    Returns:
        TrialEnsemble over the B trials
    """
    labels = np.atleast_2d(labels)
    batch = labels.shape[0]
    if batch < 1:
        raise EvaluationError("An ensemble needs at least one trial")
    if labels.shape[1] != targets.n_points:
        raise EvaluationError(f"Labels cover {labels.shape[1]} points, targets expect {targets.n_points}")

    labels = labels.astype(np.int16 if k <= np.iinfo(np.int16).max else np.int32, copy=False)
    separation_counts = _separation_counts(labels, targets.pair_u, targets.pair_v)
    zero_separation_counts = _separation_counts(labels, targets.zero_u, targets.zero_v)

    counts = _distinct_cluster_counts(targets, labels, k)
    width = k + 1
    flat = np.arange(targets.n_points)[None, :] * width + counts
    histogram = np.bincount(flat.ravel(), minlength=targets.n_points * width).reshape(targets.n_points, width)

    return TrialEnsemble(
        targets=targets,
        trial_count=batch,
        separation_counts=separation_counts,
        zero_separation_counts=zero_separation_counts,
        community_histogram=histogram.astype(np.int64),
        max_radii=np.asarray(max_radii, dtype=np.float64),
        max_draws=np.zeros(batch) if max_draws is None else np.asarray(max_draws, dtype=np.float64),
        cluster_counts=np.asarray(cluster_counts, dtype=np.int64),
        master_seed=master_seed,
        first_trial=first_trial,
    )


def run_trials(space: MetricSpace, base: Clustering, config: FairConfig, trials: int,
               master_seed: Optional[int] = None, targets: Optional[EvaluationTargets] = None,
               first_trial: int = 0, workers: int = 1,
               batch_size: Optional[int] = None) -> TrialEnsemble:
    """
    Run independent fair expansions and accumulate their statistics

    Trial i draws from trial_rng(master_seed, first_trial + i), so the
    ensemble is identical for any worker count or batch size.

    Args:
        space: Metric space
        base: Base clustering to expand
        config: Fair parameters
        trials: Number of trials T >= 1
        master_seed: Seed for the trial streams; defaults to config.rng_seed
        targets: Scoring targets; defaults to targets built from base.max_radius
        first_trial: Index of the first trial stream
        workers: Threads running batches
        batch_size: Trials vectorised together

    Returns:
        TrialEnsemble over all trials
    """
    if trials < 1:
        raise EvaluationError(f"Trial count must be at least 1, got {trials}")
    check_base(space, base)
    seed = config.rng_seed if master_seed is None else master_seed
    if targets is None:
        targets = build_targets(space, base.max_radius)
    if targets.n_points != space.n:
        raise EvaluationError("Targets were built for a different space")
    batch_size = batch_size or settings.BATCH_SIZE

    starts = range(first_trial, first_trial + trials, batch_size)

    def run_batch(start: int) -> TrialEnsemble:
        stop = min(start + batch_size, first_trial + trials)
        drawn = [draw_trial(base, config, trial_rng(seed, t)) for t in range(start, stop)]
        orders = np.stack([order for order, _ in drawn])
        draws = np.stack([x for _, x in drawn])
        batch = expand_batch(space, base, orders, draws)
        logger.debug(f"Trials {start}-{stop - 1} done")
        return ensemble_from_labels(targets, batch.labels, base.k, batch.max_radii, batch.cluster_counts,
                                    max_draws=draws.max(axis=1), master_seed=seed, first_trial=start)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(run_batch, starts))
    else:
        parts = [run_batch(start) for start in starts]

    ensemble = parts[0]
    for part in parts[1:]:
        ensemble = ensemble.merge(part)

    logger.info(f"{trials} trials done: psi={config.psi:g}, mean max radius {ensemble.max_radii.mean():g}")
    return ensemble


@dataclass(frozen=True)
class PairwiseReport:
    """
    Separation statistics of the tracked pairs

    Attributes:
        probabilities: Empirical separation probability per tracked pair
        ratios: probability / (d / R_ref) per tracked pair
        max_ratio: Worst ratio, 0 when nothing is separated
        argmax_pair: (u, v) achieving max_ratio, None when max_ratio is 0
        zero_distance_separations: Separations of co-located pairs (always 0)
    """
    pairs: np.ndarray
    distances: np.ndarray
    probabilities: np.ndarray
    ratios: np.ndarray
    standard_errors: np.ndarray
    max_ratio: float
    argmax_pair: Optional[Tuple[int, int]]
    zero_distance_separations: int


@dataclass(frozen=True)
class CommunityReport:
    """
    Fragmentation statistics of the point-centred communities

    Attributes:
        mean_counts: Mean distinct clusters per community
        max_mean: Worst mean
        argmax_community: Center point of the worst community
        exceed_frequency: t -> frequency of more than t clusters, per community
    """
    mean_counts: np.ndarray
    max_mean: float
    argmax_community: int
    sizes: np.ndarray
    diameters: np.ndarray
    exceed_frequency: Dict[int, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class RadiusReport:
    """Mean largest radius over trials and its ratios to the known optimum and R_ref"""
    trials: int
    mean_max_radius: float
    min_max_radius: float
    max_max_radius: float
    reference_radius: float
    ratio_to_reference: Optional[float] = None
    known_optimum: Optional[float] = None
    ratio_to_optimum: Optional[float] = None

    @property
    def price_of_fairness(self) -> Optional[float]:
        return self.ratio_to_optimum


def pairwise_fairness(ensemble: TrialEnsemble) -> PairwiseReport:
    """
    Separation probability ratios of every tracked pair

    Only pairs with 0 < d(u, v) <= pair_cap * R_ref enter the ratios;
    co-located pairs are reported separately.
    """
    if ensemble.trial_count < 1:
        raise EvaluationError("Empty ensemble")
    targets = ensemble.targets
    t = ensemble.trial_count
    p = ensemble.separation_counts / t
    ratios = p * targets.reference_radius / targets.pair_distance
    stderr = np.sqrt(p * (1 - p) / t)

    max_ratio = 0.0
    argmax = None
    if ratios.size and ratios.max() > 0:
        i = int(np.argmax(ratios))
        max_ratio = float(ratios[i])
        argmax = (int(targets.pair_u[i]), int(targets.pair_v[i]))

    return PairwiseReport(
        pairs=np.column_stack([targets.pair_u, targets.pair_v]),
        distances=targets.pair_distance,
        probabilities=p,
        ratios=ratios,
        standard_errors=stderr,
        max_ratio=max_ratio,
        argmax_pair=argmax,
        zero_distance_separations=int(ensemble.zero_separation_counts.sum()),
    )


def fragmentation_frequency(ensemble: TrialEnsemble, t: int) -> np.ndarray:
    """Per-community frequency of being split into more than t clusters"""
    if t < 1:
        raise EvaluationError(f"t must be at least 1, got {t}")
    return ensemble.community_histogram[:, t + 1:].sum(axis=1) / ensemble.trial_count


def community_preservation(ensemble: TrialEnsemble) -> CommunityReport:
    """
    Mean number of distinct clusters each point-centred community meets

    Communities are the closed balls of radius R_ref / community_divisor
    around every point.
    """
    if ensemble.trial_count < 1:
        raise EvaluationError("Empty ensemble")
    histogram = ensemble.community_histogram
    means = (histogram * np.arange(histogram.shape[1])).sum(axis=1) / ensemble.trial_count
    worst = int(np.argmax(means))
    return CommunityReport(
        mean_counts=means,
        max_mean=float(means[worst]),
        argmax_community=worst,
        sizes=ensemble.targets.community_size,
        diameters=ensemble.targets.community_diameter,
        exceed_frequency={t: fragmentation_frequency(ensemble, t) for t in settings.FRAGMENT_THRESHOLDS},
    )


def radius_stats(ensemble: TrialEnsemble, known_optimum: Optional[float] = None) -> RadiusReport:
    """
    Mean of the per-trial largest radius, with optional ratios

    Raises:
        EvaluationError: For an empty ensemble or a non-positive known optimum
    """
    if ensemble.trial_count < 1 or ensemble.max_radii.size == 0:
        raise EvaluationError("Empty ensemble")
    if known_optimum is not None and not known_optimum > 0:
        raise EvaluationError(f"Known optimum must be positive, got {known_optimum}")

    mean = float(ensemble.max_radii.mean())
    reference = ensemble.reference_radius
    return RadiusReport(
        trials=ensemble.trial_count,
        mean_max_radius=mean,
        min_max_radius=float(ensemble.max_radii.min()),
        max_max_radius=float(ensemble.max_radii.max()),
        reference_radius=reference,
        ratio_to_reference=mean / reference if reference > 0 else None,
        known_optimum=known_optimum,
        ratio_to_optimum=mean / known_optimum if known_optimum is not None else None,
    )


def evaluate_deterministic(space: MetricSpace, clustering, reference_radius: Optional[float] = None,
                           targets: Optional[EvaluationTargets] = None,
                           known_optimum: Optional[float] = None) -> Tuple[PairwiseReport, CommunityReport, RadiusReport]:
    """
    Score a single partition as a one-trial ensemble

    Separation probabilities become 0/1 indicators, so the worst pair ratio
    comes from the nearest separated tracked pair.

    Args:
        space: Metric space
        clustering: Clustering or ExpandedClustering
        reference_radius: R_ref; ignored when targets are given
        targets: Prebuilt scoring targets
        known_optimum: Optional optimum radius for the ratio

    Returns:
        (PairwiseReport, CommunityReport, RadiusReport)
    """
    if targets is None:
        if reference_radius is None:
            raise EvaluationError("Either a reference radius or targets are required")
        targets = build_targets(space, reference_radius)
    labels = np.asarray(clustering.assignment)[None, :]
    occupied = np.unique(labels).size
    ensemble = ensemble_from_labels(targets, labels, clustering.k,
                                    max_radii=np.array([clustering.max_radius]),
                                    cluster_counts=np.array([occupied]))
    return pairwise_fairness(ensemble), community_preservation(ensemble), radius_stats(ensemble, known_optimum)


def draw_tail_frequency(ensemble: TrialEnsemble, threshold: float) -> float:
    """Fraction of trials whose largest expansion exceeds threshold"""
    return float(np.mean(ensemble.max_draws > threshold))


def _binomial_slack(p: np.ndarray, trials: int, sigmas: float) -> np.ndarray:
    return sigmas * np.sqrt(p * (1 - p) / trials)


def pairwise_bound_violations(ensemble: TrialEnsemble, psi: float, base_radius: float,
                              sigmas: float = 3.0) -> List[Tuple[int, int, float, float]]:
    """
    Tracked pairs whose separation frequency breaks d / (psi R) plus binomial slack

    Only pairs with d < psi * R are checked (the bound is trivial otherwise).

    Returns:
        (u, v, empirical probability, bound) for every violating pair
    """
    delta = psi * base_radius
    targets = ensemble.targets
    p = ensemble.separation_counts / ensemble.trial_count
    checked = targets.pair_distance < delta
    bound = targets.pair_distance / delta + _binomial_slack(p, ensemble.trial_count, sigmas) if delta > 0 else p
    bad = np.flatnonzero(checked & (p > bound))
    return [(int(targets.pair_u[i]), int(targets.pair_v[i]), float(p[i]), float(bound[i])) for i in bad]


def community_bound_violations(ensemble: TrialEnsemble, psi: float, base_radius: float, t: int,
                               sigmas: float = 3.0) -> List[Tuple[int, float, float]]:
    """
    Communities split into more than t clusters more often than (D / (psi R))^t plus slack

    Only communities with diameter D < psi * R are checked.

    Returns:
        (community center, empirical frequency, bound) for every violation
    """
    delta = psi * base_radius
    if delta <= 0:
        return []
    diam = ensemble.targets.community_diameter
    freq = fragmentation_frequency(ensemble, t)
    bound = (diam / delta) ** t + _binomial_slack(freq, ensemble.trial_count, sigmas)
    bad = np.flatnonzero((diam < delta) & (freq > bound))
    return [(int(c), float(freq[c]), float(bound[c])) for c in bad]


@dataclass(frozen=True)
class TuningResult:
    """Outcome of the lambda-scale search"""
    lambda_scale: float
    history: List[Tuple[float, PairwiseReport, CommunityReport, RadiusReport]]


def tune_lambda_scale(space: MetricSpace, base: Clustering, targets: EvaluationTargets,
                      max_pair_ratio: float, trials: int, seed: int,
                      low: float = 1.0, high: float = 64.0, steps: int = 6,
                      order_policy: str = "uniform_random", workers: int = 1,
                      known_optimum: Optional[float] = None) -> TuningResult:
    """
    Search for the tightest lambda scale that keeps the worst pair ratio in bounds

    Larger scales mean smaller expansions (tighter radii, weaker fairness).
    Geometric bisection over [low, high] keeps the largest scale whose
    empirical max pair ratio stays within max_pair_ratio.

    Args:
        space: Metric space
        base: Base clustering
        targets: Scoring targets shared with the other algorithms
        max_pair_ratio: Acceptable worst separation ratio
        trials: Trials per evaluated scale
        seed: Master seed, reused for every scale
        low, high: Search interval of lambda scales
        steps: Bisection steps after checking the endpoints
        known_optimum: Optional optimum radius carried into the radius reports

    Returns:
        TuningResult with the chosen scale and every evaluated point
    """
    if not 0 < low < high:
        raise EvaluationError(f"Need 0 < low < high, got [{low}, {high}]")
    history: List[Tuple[float, PairwiseReport, CommunityReport, RadiusReport]] = []

    def feasible(scale: float) -> bool:
        cfg = FairConfig.from_lambda_scale(scale, order_policy=order_policy, rng_seed=seed)
        ensemble = run_trials(space, base, cfg, trials, targets=targets, workers=workers)
        pairwise = pairwise_fairness(ensemble)
        history.append((scale, pairwise, community_preservation(ensemble), radius_stats(ensemble, known_optimum)))
        logger.info(f"lambda scale {scale:g}: max pair ratio {pairwise.max_ratio:.4g}")
        return pairwise.max_ratio <= max_pair_ratio

    if feasible(high):
        return TuningResult(lambda_scale=high, history=history)
    if not feasible(low):
        logger.warning(f"No lambda scale in [{low}, {high}] reaches max pair ratio {max_pair_ratio}")
        return TuningResult(lambda_scale=low, history=history)

    for _ in range(steps):
        mid = math.sqrt(low * high)
        if feasible(mid):
            low = mid
        else:
            high = mid
    return TuningResult(lambda_scale=low, history=history)
