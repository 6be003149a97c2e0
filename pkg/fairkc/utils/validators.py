from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

from fairkc import config

ALGORITHMS = ["gonz1", "gonzplus", "scr", "bruteforce"]
COMMANDS = ["solve", "fair-eval", "bench", "tune"]
FAIR_COMMANDS = {"fair-eval", "bench", "tune"}
# Commands whose --algorithm names the base solver of the fair runs
BASE_COMMANDS = {"fair-eval", "tune"}
NUMERIC_REPORT_FIELDS = ("lambda_scale", "mean_max_radius", "radius_ratio_opt", "radius_ratio_scr",
                         "max_pair_ratio", "max_community_mean")


def round_significant(value: Optional[float], digits: int = config.REPORT_SIGNIFICANT_DIGITS) -> Optional[float]:
    """Round to the given number of significant digits, the precision reports are written with"""
    if value is None:
        return None
    return float(f"{float(value):.{digits}g}")


@dataclass
class RunSpec:
    """Everything a CLI command needs, after validation"""
    command: str
    input: str
    format: str = "pmed"
    columns: List[str] = field(default_factory=list)
    algorithms: List[str] = field(default_factory=list)
    base: str = "scr"
    k: Optional[int] = None
    k_range: Optional[Tuple[int, int]] = None
    lambda_scales: List[float] = field(default_factory=list)
    psi: Optional[float] = None
    order: str = "uniform_random"
    trials: int = config.DEFAULT_TRIALS
    seed: int = 0
    community_divisor: float = config.DEFAULT_COMMUNITY_DIVISOR
    pair_cap: float = config.DEFAULT_PAIR_CAP
    optima: Optional[str] = None
    out: Optional[str] = None
    out_format: str = "csv"
    threads: int = 1
    name: Optional[str] = None
    normalize: str = "minmax"
    sample_size: Optional[int] = None
    sample_seed: Optional[int] = None
    max_pair_ratio: float = 1.0
    fair: Optional[bool] = None

    def __post_init__(self):
        if self.fair is None:
            self.fair = self.command in FAIR_COMMANDS

    @property
    def k_values(self) -> List[Optional[int]]:
        """k values to sweep; [None] means 'take k from the instance'"""
        if self.k_range is not None:
            lo, hi = self.k_range
            return list(range(lo, hi + 1))
        return [self.k]


@dataclass
class ReportRow:
    """One row of a benchmark report; numbers are already rounded for output"""
    instance: str
    algorithm: str
    k: int
    lambda_scale: Optional[float]
    mean_max_radius: float
    radius_ratio_opt: Optional[float]
    radius_ratio_scr: Optional[float]
    max_pair_ratio: float
    max_community_mean: float
    trials: int
    seed: Optional[int]

    def __post_init__(self):
        for name in NUMERIC_REPORT_FIELDS:
            setattr(self, name, round_significant(getattr(self, name)))


_positive = validate.Range(min=0, min_inclusive=False)


class RunSpecSchema(Schema):
    """Schema for validating a command-line run specification"""
    command = fields.String(required=True, validate=validate.OneOf(COMMANDS))
    input = fields.String(required=True, validate=validate.Length(min=1))
    format = fields.String(load_default="pmed", validate=validate.OneOf(["pmed", "csv"]))
    columns = fields.List(fields.String(validate=validate.Length(min=1)), load_default=list)
    algorithms = fields.List(fields.String(validate=validate.OneOf(ALGORITHMS)), load_default=list)
    base = fields.String(load_default=None, allow_none=True, validate=validate.OneOf(ALGORITHMS))
    k = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=1))
    k_range = fields.Tuple((fields.Integer(validate=validate.Range(min=1)),
                            fields.Integer(validate=validate.Range(min=1))),
                           load_default=None, allow_none=True)
    lambda_scales = fields.List(fields.Float(validate=_positive), load_default=list)
    psi = fields.Float(load_default=None, allow_none=True, validate=_positive)
    order = fields.String(load_default="uniform_random", validate=validate.OneOf(["given", "uniform_random"]))
    trials = fields.Integer(load_default=config.DEFAULT_TRIALS, validate=validate.Range(min=1))
    seed = fields.Integer(load_default=0, validate=validate.Range(min=0))
    community_divisor = fields.Float(load_default=config.DEFAULT_COMMUNITY_DIVISOR, validate=_positive)
    pair_cap = fields.Float(load_default=config.DEFAULT_PAIR_CAP, validate=_positive)
    optima = fields.String(load_default=None, allow_none=True)
    out = fields.String(load_default=None, allow_none=True)
    out_format = fields.String(load_default="csv", validate=validate.OneOf(["csv", "json"]))
    threads = fields.Integer(load_default=config.DEFAULT_THREADS, validate=validate.Range(min=1))
    name = fields.String(load_default=None, allow_none=True)
    normalize = fields.String(load_default="minmax", validate=validate.OneOf(["minmax", "zscore", "none"]))
    sample_size = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=1))
    sample_seed = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=0))
    max_pair_ratio = fields.Float(load_default=1.0, validate=_positive)
    fair = fields.Boolean(load_default=None, allow_none=True)

    @validates_schema
    def validate_combinations(self, data, **kwargs):
        if data.get("k") is not None and data.get("k_range") is not None:
            raise ValidationError("Give either --k or --k-range, not both", "k_range")
        k_range = data.get("k_range")
        if k_range is not None and k_range[0] > k_range[1]:
            raise ValidationError("k range is empty", "k_range")
        if data["format"] == "csv":
            if not data.get("columns"):
                raise ValidationError("CSV input needs --columns", "columns")
            if data.get("k") is None and k_range is None:
                raise ValidationError("CSV input needs --k or --k-range", "k")
        if data["command"] == "solve" and len(data.get("algorithms") or []) != 1:
            raise ValidationError("solve needs exactly one --algorithm", "algorithms")
        if data["command"] in FAIR_COMMANDS and data.get("psi") is not None and data.get("lambda_scales"):
            raise ValidationError("Give either --psi or --lambda-scale, not both", "psi")
        algorithms = data.get("algorithms") or []
        if data["command"] in BASE_COMMANDS and algorithms:
            if len(algorithms) != 1:
                raise ValidationError(f"{data['command']} takes one --algorithm, the base solver", "algorithms")
            if data.get("base") not in (None, algorithms[0]):
                raise ValidationError("--algorithm and --base name different base solvers", "base")

    @post_load
    def make_spec(self, data, **kwargs):
        if data.get("base") is None:
            algorithms = data.get("algorithms") or []
            data["base"] = algorithms[0] if data["command"] in BASE_COMMANDS and algorithms else "scr"
        return RunSpec(**data)


class ReportRowSchema(Schema):
    """Schema for one report row (algorithm x instance x lambda)"""
    instance = fields.String(required=True)
    algorithm = fields.String(required=True)
    k = fields.Integer(required=True, validate=validate.Range(min=1))
    lambda_scale = fields.Float(allow_none=True, load_default=None)
    mean_max_radius = fields.Float(required=True)
    radius_ratio_opt = fields.Float(allow_none=True, load_default=None)
    radius_ratio_scr = fields.Float(allow_none=True, load_default=None)
    max_pair_ratio = fields.Float(required=True)
    max_community_mean = fields.Float(required=True)
    trials = fields.Integer(required=True, validate=validate.Range(min=1))
    seed = fields.Integer(allow_none=True, load_default=None)

    @post_load
    def make_row(self, data, **kwargs):
        return ReportRow(**data)
