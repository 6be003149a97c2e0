import os

import numpy as np
import pytest

from fairkc.metric import build_euclidean, random_euclidean
from fairkc.unfair import assign_to_nearest

TINY_PMED = "4 3 2\n1 2 5\n2 3 5\n3 4 5\n"


@pytest.fixture
def line_space():
    """Points 0, 5, 6, 11 on a line"""
    return build_euclidean([[0.0], [5.0], [6.0], [11.0]])


@pytest.fixture
def line_base(line_space):
    """Centers at 0 and 11; both clusters have radius 5"""
    return assign_to_nearest(line_space, [0, 3])


@pytest.fixture
def small_space():
    return random_euclidean(30, dim=2, seed=7)


@pytest.fixture
def tiny_pmed(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text(TINY_PMED)
    return str(path)


@pytest.fixture
def points_csv(tmp_path):
    """40 rows of x, y plus a label column"""
    rng = np.random.default_rng(3)
    lines = ["x,y,label"]
    for i, (x, y) in enumerate(rng.uniform(0, 100, size=(40, 2))):
        lines.append(f"{x:.3f},{y:.3f},row{i}")
    path = tmp_path / "points.csv"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def pmed_dir():
    """Directory of OR-Lib pmed files, from FAIRKC_PMED_DIR"""
    directory = os.environ.get("FAIRKC_PMED_DIR")
    if not directory or not os.path.isdir(directory):
        pytest.skip("FAIRKC_PMED_DIR is not set")
    return directory
