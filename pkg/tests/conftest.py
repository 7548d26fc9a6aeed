import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from emergence_lab import fixtures  # noqa: E402
from emergence_lab.tpm import validate_tpm  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def tpms(draw, min_n=1, max_n=6, sparse=True):
    """Random row-stochastic matrices, optionally with structural zeros."""
    n = draw(st.integers(min_n, max_n))
    rows = []
    for _ in range(n):
        row = draw(st.lists(st.floats(0.0, 1.0, allow_subnormal=False), min_size=n, max_size=n))
        row = [v if v >= 1e-3 else 0.0 for v in row]
        if sparse:
            keep = draw(st.lists(st.booleans(), min_size=n, max_size=n))
            row = [v if k else 0.0 for v, k in zip(row, keep)]
        if sum(row) <= 1e-6:
            row = [0.0] * n
            row[draw(st.integers(0, n - 1))] = 1.0
        total = sum(row)
        rows.append([v / total for v in row])
    return validate_tpm(rows)


def random_tpm(rng: np.random.Generator, n: int, sparsity: float = 0.4):
    rows = rng.random((n, n)) * (rng.random((n, n)) > sparsity)
    empty = rows.sum(axis=1) == 0
    rows[empty, rng.integers(0, n, empty.sum())] = 1.0
    return validate_tpm(rows / rows.sum(axis=1, keepdims=True))


def random_weakly_symmetric(rng: np.random.Generator, n: int):
    """Latin-square layout of one random row: rows and columns both permute it."""
    v = rng.random(n) * (rng.random(n) > 0.3)
    if v.sum() == 0:
        v[rng.integers(n)] = 1.0
    v = v / v.sum()
    latin = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    latin = latin[rng.permutation(n)][:, rng.permutation(n)]
    return validate_tpm(v[rng.permutation(n)][latin])


@pytest.fixture
def m1():
    return fixtures.m1()


@pytest.fixture
def m2():
    return fixtures.m2()


@pytest.fixture
def m3():
    return fixtures.m3()


@pytest.fixture
def absorbing8():
    return fixtures.absorbing8()


@pytest.fixture
def hetero8():
    return fixtures.hetero8()


@pytest.fixture
def exogenous8():
    return fixtures.exogenous8()


@pytest.fixture
def coding4():
    return fixtures.coding4()
