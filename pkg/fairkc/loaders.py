"""
Instance Loaders for fairkc

This module reads the inputs of the benchmark runs:

- OR-Lib p-median instances ("n m p" header, then m "u v cost" records)
- CSV point datasets with per-column normalisation and seeded sampling
- Known-optima sidecar files ("name,radius" records)
"""

import csv
import logging
import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fairkc.metric import MetricSpace, build_from_graph
from fairkc.utils.errors import InstanceFormatError

# Configure logging
logger = logging.getLogger(__name__)

NORMALIZATION_METHODS = ("minmax", "zscore", "none")
MISSING_VALUES = {"", "?", "NA", "NaN", "nan"}


@dataclass(frozen=True)
class PmedInstance:
    """
    An OR-Lib p-median instance

    Attributes:
        name: Instance name (file stem)
        n: Number of vertices
        m: Number of edge records
        k: Number of centers (the format's p)
        edges: (u, v, cost) records, 1-indexed, in file order
    """
    name: str
    n: int
    m: int
    k: int
    edges: Tuple[Tuple[int, int, int], ...]

    def to_space(self) -> MetricSpace:
        """
        Shortest-path metric of the instance graph

        An edge listed more than once keeps its last listed cost.
        """
        latest: Dict[Tuple[int, int], int] = {}
        for u, v, cost in self.edges:
            latest[(min(u, v), max(u, v))] = cost
        duplicates = len(self.edges) - len(latest)
        if duplicates:
            logger.warning(f"{self.name}: {duplicates} repeated edges, keeping the last cost of each")
        return build_from_graph(self.n, [(u, v, c) for (u, v), c in latest.items()])


def _int_token(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise InstanceFormatError(f"Expected an integer for {what}, found '{token}'")


def parse_pmed(text: str, name: str = "pmed") -> PmedInstance:
    """
    Parse the OR-Lib p-median format

    Tokens may be separated by any whitespace. The body must hold exactly
    m edge records.

    Args:
        text: File contents
        name: Instance name

    Returns:
        PmedInstance

    Raises:
        InstanceFormatError: For a wrong token count, non-integer tokens, bad endpoints or costs
    """
    tokens = text.split()
    if len(tokens) < 3:
        raise InstanceFormatError(f"{name}: expected header 'n m p', found {len(tokens)} tokens")

    n = _int_token(tokens[0], "n")
    m = _int_token(tokens[1], "m")
    k = _int_token(tokens[2], "p")
    if n < 1 or m < 0 or not 1 <= k <= n:
        raise InstanceFormatError(f"{name}: invalid header n={n}, m={m}, p={k}")

    body = tokens[3:]
    found = len(body) // 3
    if found < m:
        raise InstanceFormatError(f"{name}: expected {m} edges, found {found}")
    if len(body) != 3 * m:
        raise InstanceFormatError(f"{name}: expected {3 * m} edge tokens, found {len(body)}")

    edges = []
    for i in range(m):
        u, v, cost = (_int_token(t, f"edge {i + 1}") for t in body[3 * i:3 * i + 3])
        if not (1 <= u <= n and 1 <= v <= n):
            raise InstanceFormatError(f"{name}: edge {i + 1} endpoint out of range [1, {n}]: ({u}, {v})")
        if cost <= 0:
            raise InstanceFormatError(f"{name}: edge {i + 1} has non-positive cost {cost}")
        edges.append((u, v, cost))

    logger.debug(f"Parsed {name}: n={n}, m={m}, p={k}")
    return PmedInstance(name=name, n=n, m=m, k=k, edges=tuple(edges))


def load_pmed(path: str) -> PmedInstance:
    """Read and parse a pmed file, naming the instance after the file stem"""
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise InstanceFormatError(f"Cannot read {path}: {e}")
    return parse_pmed(text, name=name)


def _natural_key(path: str):
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", os.path.basename(path))]


def discover_pmed(directory: str) -> List[str]:
    """
    List pmed*.txt files in natural order (pmed1, pmed2, ..., pmed40)

    Raises:
        InstanceFormatError: When the directory is missing or holds no instances
    """
    if not os.path.isdir(directory):
        raise InstanceFormatError(f"Not a directory: {directory}")
    paths = [
        os.path.join(directory, f) for f in os.listdir(directory)
        if f.lower().startswith("pmed") and f.lower().endswith(".txt")
    ]
    if not paths:
        raise InstanceFormatError(f"No pmed*.txt instances in {directory}")
    return sorted(paths, key=_natural_key)


@dataclass
class NormalizationSpec:
    """
    Per-column normalisation, fitted on the full parsed data

    Attributes:
        methods: Column name -> minmax, zscore or none (default method otherwise)
        default: Method for columns not listed
        params: Fitted (offset, scale) per column; output is (x - offset) / scale
    """
    methods: Dict[str, str] = field(default_factory=dict)
    default: str = "minmax"
    params: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        for method in list(self.methods.values()) + [self.default]:
            if method not in NORMALIZATION_METHODS:
                raise InstanceFormatError(f"Unknown normalisation '{method}'. Choose from: {', '.join(NORMALIZATION_METHODS)}")

    def method_for(self, column: str) -> str:
        return self.methods.get(column, self.default)

    def fit(self, columns: Sequence[str], data: np.ndarray) -> "NormalizationSpec":
        """Fit offsets and scales for every column of data"""
        for j, column in enumerate(columns):
            values = data[:, j]
            method = self.method_for(column)
            if method == "minmax":
                offset, scale = float(values.min()), float(values.max() - values.min())
            elif method == "zscore":
                offset, scale = float(values.mean()), float(values.std())
            else:
                offset, scale = 0.0, 1.0
            if scale == 0:
                logger.warning(f"Column '{column}' is constant; it normalises to 0")
            self.params[column] = (offset, scale)
        return self

    def apply(self, columns: Sequence[str], data: np.ndarray) -> np.ndarray:
        out = np.empty_like(data, dtype=np.float64)
        for j, column in enumerate(columns):
            if column not in self.params:
                raise InstanceFormatError(f"Normalisation was not fitted for column '{column}'")
            offset, scale = self.params[column]
            # Degenerate (constant) columns map to 0
            out[:, j] = 0.0 if scale == 0 else (data[:, j] - offset) / scale
        return out


def load_points_csv(path: str, columns: Sequence[str], spec: Optional[NormalizationSpec] = None,
                    sample_size: Optional[int] = None, seed: Optional[int] = None) -> List[List[float]]:
    """
    Load numeric columns of a headed CSV file as points

    Rows with a missing or non-numeric value in a selected column are
    skipped. Normalisation is fitted on every parsed row, then a uniform
    sample without replacement is drawn when sample_size is given.

    Args:
        path: CSV file with a header row
        columns: Column names to use as coordinates
        spec: Normalisation (minmax on every column by default)
        sample_size: Number of rows to keep
        seed: Sampling seed

    Returns:
        List of points, one list of floats per row

    Raises:
        InstanceFormatError: For missing columns, no usable rows or an oversized sample
    """
    if not columns:
        raise InstanceFormatError("At least one column is required")
    spec = spec or NormalizationSpec()

    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = [h.strip() for h in next(reader, [])]
            missing = [c for c in columns if c not in header]
            if missing:
                raise InstanceFormatError(f"{path}: missing columns {missing}; header has {header}")
            index = [header.index(c) for c in columns]

            rows = []
            skipped = 0
            for record in reader:
                try:
                    cells = [record[i].strip() for i in index]
                    if any(cell in MISSING_VALUES for cell in cells):
                        raise ValueError
                    rows.append([float(cell) for cell in cells])
                except (ValueError, IndexError):
                    skipped += 1
    except OSError as e:
        raise InstanceFormatError(f"Cannot read {path}: {e}")

    if skipped:
        logger.warning(f"{path}: skipped {skipped} rows with missing or non-numeric values")
    if not rows:
        raise InstanceFormatError(f"{path}: no parseable rows for columns {list(columns)}")

    data = np.array(rows, dtype=np.float64)
    data = spec.fit(columns, data).apply(columns, data)

    if sample_size is not None:
        if sample_size > data.shape[0]:
            raise InstanceFormatError(f"Sample of {sample_size} requested but only {data.shape[0]} rows are available")
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(data.shape[0], size=sample_size, replace=False))
        data = data[chosen]

    logger.info(f"Loaded {data.shape[0]} points with {data.shape[1]} columns from {path}")
    return data.tolist()


def load_known_optima(path: str) -> Dict[str, float]:
    """
    Read a sidecar of known optimal radii

    Each record is "name,radius". A leading "name,radius" header and blank
    lines are allowed.

    Raises:
        InstanceFormatError: For malformed records or duplicate names
    """
    optima: Dict[str, float] = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            for lineno, record in enumerate(csv.reader(f), start=1):
                if not record or all(not cell.strip() for cell in record):
                    continue
                if len(record) != 2:
                    raise InstanceFormatError(f"{path}:{lineno}: expected 'name,radius', found {record}")
                name, value = record[0].strip(), record[1].strip()
                if lineno == 1 and name.lower() == "name" and value.lower() == "radius":
                    continue
                try:
                    radius = float(value)
                except ValueError:
                    raise InstanceFormatError(f"{path}:{lineno}: radius '{value}' is not a number")
                if not name or radius <= 0:
                    raise InstanceFormatError(f"{path}:{lineno}: need a name and a positive radius")
                if name in optima:
                    raise InstanceFormatError(f"{path}:{lineno}: duplicate instance '{name}'")
                optima[name] = radius
    except OSError as e:
        raise InstanceFormatError(f"Cannot read {path}: {e}")
    return optima
