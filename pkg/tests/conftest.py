import json
from pathlib import Path

import numpy as np
import pytest

from ssg_design import GameInstance, L0Budget, L1Budget
from ssg_design.kernel import LinearModel

DATA = Path(__file__).parent / "data"


def knapsack_model(relax=False):
    m = LinearModel("knapsack")
    xs = []
    for k in range(3):
        xs.append(m.add_var(f"x{k}", 0, 1) if relax else m.add_binary(f"x{k}"))
    m.add_constr(dict(zip(xs, (2, 3, 4))), "<=", 5, "cap")
    m.set_objective(dict(zip(xs, (3, 4, 5))), "max")
    return m


def random_game(rng, n, r=None, integer=True, zero_ok=False):
    hi = 2 * n
    lo = 0 if zero_ok else 1
    draw = (lambda: rng.integers(lo, hi + 1, n).astype(float)) if integer else \
        (lambda: rng.uniform(lo, hi, n))
    Rd, Pd, Ra, Pa = draw(), -draw(), draw(), -draw()
    return GameInstance(Rd, Pd, Ra, Pa, 1.0 if r is None else r)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def matrix1():
    return GameInstance([1, 1, 10], [-1, -10, -10], [1, 10, 1], [-10, -10, -10], 1.0)


@pytest.fixture
def matrix2():
    return GameInstance([10, 1, 1], [-1.1, -1, -0.9], [1, 1, 1], [-1, -1, -1], 1.0)


@pytest.fixture
def nine_target():
    """Nine targets on which the single-target greedy manipulation is analysed."""
    Ra = [2, 2] + [1.5] * 7
    Pa = [-2, -2] + [-8.5] * 7
    Rd = [10, 1] + [1] * 7
    Pd = [-1] * 9
    return GameInstance(Rd, Pd, Ra, Pa, 1.0), L1Budget.uniform(1.0, 9)


@pytest.fixture
def l0_budget2():
    return L0Budget(2)


@pytest.fixture
def two_target_file():
    return DATA / "two_target.json"


@pytest.fixture
def matrix1_file():
    return DATA / "matrix1.json"


def load_json(path):
    return json.loads(Path(path).read_text())
