import functools

import pytest

from genbound.bounds import collect_inputs, evaluate_bounds
from genbound.problems import build_problem

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_problem(example, n):
    return build_problem(example, n)


@functools.lru_cache(maxsize=None)
def cached_bounds(example, n):
    p = cached_problem(example, n)
    q = collect_inputs(p)
    return q, evaluate_bounds(p, q)


@pytest.fixture
def sign3():
    return cached_problem("sign-erm", 3)


@pytest.fixture
def onehot2():
    return cached_problem("onehot-gd", 2)


@pytest.fixture
def rerm3():
    return cached_problem("regularized-erm", 3)


@pytest.fixture
def thresh4():
    return cached_problem("threshold-erm", 4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
