"""
fairkc: pairwise-fair, community-preserving k-center clustering

Classical solvers (Gonzalez, best-start Gonzalez, Scr, exhaustive search),
the randomized fair expansion on top of any of them, and the Monte-Carlo
harness that scores radius, pairwise fairness and community preservation.
"""

from fairkc.evaluation import (
    EvaluationTargets, TrialEnsemble, build_targets, community_preservation, evaluate_deterministic,
    pairwise_fairness, radius_stats, run_trials,
)
from fairkc.fair import ExpandedClustering, FairConfig, OrderPolicy, fair_assign, fair_solve, sample_expansion
from fairkc.loaders import PmedInstance, load_known_optima, load_pmed, load_points_csv, parse_pmed
from fairkc.metric import MetricSpace, build_euclidean, build_from_graph, diameter
from fairkc.unfair import Clustering, assign_to_nearest, gonzalez, gonzalez_best_start, optimal_bruteforce, scr, solve
from fairkc.utils.data_exporter import read_report, write_report
from fairkc.utils.errors import FairKCError

__version__ = "0.1.0"
