"""
Command Line Interface for fairkc

This module provides the fairkc command with four subcommands:

- solve: run one classical solver (optionally followed by one fair expansion)
- fair-eval: Monte-Carlo evaluation of the fair expansion at several lambda scales
- bench: every unfair solver plus the fair rows, over a pmed directory or a CSV k sweep
- tune: search the lambda scale that keeps the worst pair ratio within a target

Report data goes to the output stream; logging goes to the error stream.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional

from marshmallow import ValidationError

from fairkc import config
from fairkc.evaluation import (
    EvaluationTargets, build_targets, community_preservation, evaluate_deterministic, pairwise_fairness,
    radius_stats, run_trials, tune_lambda_scale,
)
from fairkc.fair import FairConfig, fair_assign, trial_rng
from fairkc.loaders import NormalizationSpec, discover_pmed, load_known_optima, load_pmed, load_points_csv
from fairkc.metric import MetricSpace, build_euclidean
from fairkc.unfair import Clustering, solve
from fairkc.utils.data_exporter import build_row, write_report
from fairkc.utils.errors import FairKCError
from fairkc.utils.validators import ReportRow, RunSpec, RunSpecSchema

# Configure logging
logger = logging.getLogger(__name__)

PMED_BENCH_ALGORITHMS = ["gonz1", "gonzplus", "scr"]
CSV_BENCH_ALGORITHMS = ["scr"]
# lambda = 4 / R_ref when solve --fair gets no scale
SOLVE_FAIR_SCALE = 4.0


@dataclass
class Instance:
    """A loaded metric space with its name and, for pmed files, its own k"""
    name: str
    space: MetricSpace
    k: Optional[int] = None


@dataclass
class Cell:
    """One (instance, k) cell with the state shared by every algorithm on it"""
    instance: Instance
    k: int
    reference: Clustering
    targets: EvaluationTargets
    optimum: Optional[float]
    solved: Dict[str, Clustering]

    def base(self, algorithm: str, workers: int) -> Clustering:
        if algorithm not in self.solved:
            self.solved[algorithm] = solve(self.instance.space, self.k, algorithm, workers=workers)
        return self.solved[algorithm]


def fair_label(scale: float) -> str:
    """Row label of a fair run: fair-exact / fair-medium / fair-tight or fair-x<scale>"""
    name = config.LAMBDA_SCALE_NAMES.get(float(scale))
    return f"fair-{name}" if name else f"fair-x{scale:g}"


def lambda_scales(spec: RunSpec) -> List[float]:
    """Lambda scales of a fair run; --psi p is the single scale 1 / p"""
    if spec.lambda_scales:
        return list(spec.lambda_scales)
    if spec.psi is not None:
        return [1.0 / spec.psi]
    return list(config.DEFAULT_LAMBDA_SCALES)


def load_instances(spec: RunSpec) -> Iterator[Instance]:
    """Yield the instances named by --input, loading them one at a time"""
    if spec.format == "pmed":
        paths = discover_pmed(spec.input) if os.path.isdir(spec.input) else [spec.input]
        for path in paths:
            instance = load_pmed(path)
            yield Instance(name=instance.name, space=instance.to_space(), k=instance.k)
        return

    normalization = NormalizationSpec(default=spec.normalize)
    points = load_points_csv(spec.input, spec.columns, normalization,
                             sample_size=spec.sample_size, seed=spec.sample_seed)
    name = spec.name or os.path.splitext(os.path.basename(spec.input))[0]
    yield Instance(name=name, space=build_euclidean(points))


def iter_cells(spec: RunSpec) -> Iterator[Cell]:
    """
    Yield every (instance, k) cell with its Scr reference and scoring targets

    The known optimum applies only when k is the instance's own k.
    """
    optima = load_known_optima(spec.optima) if spec.optima else {}
    for instance in load_instances(spec):
        for k in spec.k_values:
            k = instance.k if k is None else k
            reference = solve(instance.space, k, "scr")
            targets = build_targets(instance.space, reference.max_radius,
                                    pair_cap=spec.pair_cap, community_divisor=spec.community_divisor)
            optimum = optima.get(instance.name) if k == instance.k else None
            yield Cell(instance=instance, k=k, reference=reference, targets=targets,
                       optimum=optimum, solved={"scr": reference})


def deterministic_row(cell: Cell, algorithm: str, clustering: Clustering) -> ReportRow:
    pairwise, community, radius = evaluate_deterministic(
        cell.instance.space, clustering, targets=cell.targets, known_optimum=cell.optimum)
    return build_row(cell.instance.name, algorithm, cell.k, pairwise, community, radius)


def fair_rows(cell: Cell, spec: RunSpec) -> List[ReportRow]:
    """T-trial fair evaluation of the cell at every requested lambda scale"""
    base = cell.base(spec.base, spec.threads)
    rows = []
    for scale in lambda_scales(spec):
        fair_config = FairConfig.from_lambda_scale(scale, order_policy=spec.order, rng_seed=spec.seed)
        ensemble = run_trials(cell.instance.space, base, fair_config, spec.trials,
                              master_seed=spec.seed, targets=cell.targets, workers=spec.threads)
        pairwise = pairwise_fairness(ensemble)
        community = community_preservation(ensemble)
        radius = radius_stats(ensemble, cell.optimum)
        logger.info(f"{cell.instance.name} k={cell.k} {fair_label(scale)}: max pair ratio "
                    f"{pairwise.max_ratio:.4g}, max community mean {community.max_mean:.4g}")
        rows.append(build_row(cell.instance.name, fair_label(scale), cell.k, pairwise, community, radius,
                              lambda_scale=scale, seed=spec.seed))
    return rows


def cmd_solve(spec: RunSpec) -> int:
    """Print the radius of one solver per cell; write report rows when --out is given"""
    algorithm = spec.algorithms[0]
    rows = []
    for cell in iter_cells(spec):
        clustering = cell.base(algorithm, spec.threads)
        if spec.fair:
            scale = lambda_scales(spec)[0] if (spec.lambda_scales or spec.psi) else SOLVE_FAIR_SCALE
            fair_config = FairConfig.from_lambda_scale(scale, order_policy=spec.order, rng_seed=spec.seed)
            expanded = fair_assign(cell.instance.space, clustering, fair_config, trial_rng(spec.seed, 0))
            pairwise, community, radius = evaluate_deterministic(
                cell.instance.space, expanded, targets=cell.targets, known_optimum=cell.optimum)
            row = build_row(cell.instance.name, fair_label(scale), cell.k, pairwise, community, radius,
                            lambda_scale=scale, seed=spec.seed)
            max_radius = expanded.max_radius
        else:
            row = deterministic_row(cell, algorithm, clustering)
            max_radius = clustering.max_radius
        print(f"{cell.instance.name}\t{cell.k}\t{row.algorithm}\t{max_radius:.6g}")
        rows.append(row)

    if spec.out is not None:
        write_report(rows, spec.out_format, spec.out)
    return 0


def cmd_fair_eval(spec: RunSpec) -> int:
    """Fair expansion over the base solver for every lambda scale, T trials each"""
    rows = []
    for cell in iter_cells(spec):
        rows.extend(fair_rows(cell, spec))
    write_report(rows, spec.out_format, spec.out or "-")
    return 0


def cmd_bench(spec: RunSpec) -> int:
    """Unfair solvers plus fair rows for every cell, as one consolidated report"""
    algorithms = spec.algorithms or (PMED_BENCH_ALGORITHMS if spec.format == "pmed" else CSV_BENCH_ALGORITHMS)
    rows = []
    for cell in iter_cells(spec):
        for algorithm in algorithms:
            rows.append(deterministic_row(cell, algorithm, cell.base(algorithm, spec.threads)))
        if spec.fair:
            rows.extend(fair_rows(cell, spec))
        logger.info(f"Finished {cell.instance.name} k={cell.k}")
    write_report(rows, spec.out_format, spec.out or "-")
    return 0


def cmd_tune(spec: RunSpec) -> int:
    """Lambda-scale search per cell; one report row per evaluated scale"""
    rows = []
    for cell in iter_cells(spec):
        base = cell.base(spec.base, spec.threads)
        result = tune_lambda_scale(cell.instance.space, base, cell.targets, spec.max_pair_ratio,
                                   spec.trials, spec.seed, order_policy=spec.order,
                                   workers=spec.threads, known_optimum=cell.optimum)
        logger.info(f"{cell.instance.name} k={cell.k}: tuned lambda scale {result.lambda_scale:.4g}")
        for scale, pairwise, community, radius in result.history:
            rows.append(build_row(cell.instance.name, fair_label(scale), cell.k, pairwise, community, radius,
                                  lambda_scale=scale, seed=spec.seed))
    write_report(rows, spec.out_format, spec.out or "-")
    return 0


COMMANDS: Dict[str, Callable[[RunSpec], int]] = {
    "solve": cmd_solve,
    "fair-eval": cmd_fair_eval,
    "bench": cmd_bench,
    "tune": cmd_tune,
}


def parse_k_range(values: List[str]) -> List[int]:
    """Accept "2..20" or "2 20" """
    text = " ".join(values).replace("..", " ")
    parts = text.split()
    if len(parts) != 2:
        raise ValidationError("Expected LO..HI or LO HI", "k_range")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ValidationError(f"k range bounds must be integers, got {values}", "k_range")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairkc", description="Pairwise-fair k-center clustering benchmarks")
    subparsers = parser.add_subparsers(dest="command", required=True)

    helps = {
        "solve": "Run one classical k-center solver",
        "fair-eval": "Evaluate the fair expansion over many trials",
        "bench": "Benchmark unfair and fair algorithms",
        "tune": "Search the lambda scale for a target pair ratio",
    }
    for command, help_text in helps.items():
        sub = subparsers.add_parser(command, help=help_text)
        sub.add_argument("--input", required=True, help="pmed file or directory, or CSV file")
        sub.add_argument("--format", choices=["pmed", "csv"], help="Input format (default pmed)")
        sub.add_argument("--columns", help="Comma-separated CSV columns used as coordinates")
        sub.add_argument("--algorithm", dest="algorithms", action="append",
                         help="gonz1, gonzplus, scr or bruteforce (repeatable for bench; "
                              "the base solver for fair-eval and tune)")
        sub.add_argument("--base", help="Base solver of fair runs (default: --algorithm, else scr)")
        sub.add_argument("--k", type=int, help="Number of centers (pmed default: from the file)")
        sub.add_argument("--k-range", nargs="+", metavar="K", help="k sweep, LO..HI or LO HI")
        sub.add_argument("--fair", action=argparse.BooleanOptionalAction, default=None,
                         help="Include fair runs")
        sub.add_argument("--lambda-scale", dest="lambda_scales", type=float, action="append",
                         help="lambda as a multiple of 1/R_Scr (repeatable)")
        sub.add_argument("--psi", type=float, help="Draw mean as a multiple of R (alternative to --lambda-scale)")
        sub.add_argument("--order", choices=["given", "uniform_random"], help="Cluster processing order")
        sub.add_argument("--trials", type=int, help=f"Trials per fair run (default {config.DEFAULT_TRIALS})")
        sub.add_argument("--seed", type=int, help="Master seed (default 0)")
        sub.add_argument("--community-divisor", type=float, help="Community radius is R_Scr / divisor")
        sub.add_argument("--pair-cap", type=float, help="Pairs with d <= cap * R_Scr are tracked")
        sub.add_argument("--optima", help="CSV sidecar of known optimal radii")
        sub.add_argument("--out", help="Report destination, - for standard output")
        sub.add_argument("--out-format", choices=["csv", "json"], help="Report format (default csv)")
        sub.add_argument("--threads", type=int, help="Worker threads")
        sub.add_argument("--name", help="Instance name for CSV input")
        sub.add_argument("--normalize", choices=["minmax", "zscore", "none"], help="CSV column normalisation")
        sub.add_argument("--sample-size", type=int, help="Rows sampled from the CSV")
        sub.add_argument("--sample-seed", type=int, help="Seed of the CSV sample")
        sub.add_argument("--max-pair-ratio", type=float, help="Target worst pair ratio for tune")
        sub.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level")
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    """Validate parsed arguments into a RunSpec"""
    raw = {key: value for key, value in vars(args).items() if value is not None and key != "log_level"}
    if "columns" in raw:
        raw["columns"] = [c.strip() for c in raw["columns"].split(",") if c.strip()]
    if "k_range" in raw:
        raw["k_range"] = parse_k_range(raw["k_range"])
    return RunSpecSchema().load(raw)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the fairkc command

    Returns:
        0 on success, 2 for invalid input, 1 for internal failures
    """
    args = build_parser().parse_args(argv)
    level = args.log_level or config.LOG_LEVEL
    logging.basicConfig(level=getattr(logging, level, logging.INFO), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        spec = spec_from_args(args)
        return COMMANDS[spec.command](spec)
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e.messages}")
        print(f"fairkc: invalid arguments: {e.messages}", file=sys.stderr)
        return 2
    except FairKCError as e:
        logger.error(e.message)
        print(f"fairkc: {e.message}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {str(e)}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
