import numpy as np
import pytest

from ppife.basis import build_global_space
from ppife.mesh import build_mesh, classify_mesh
from ppife.problem import EllipseProblem


def make_space(n_side, beta=(1.0, 10.0), problem=None):
    problem = problem or EllipseProblem(*beta)
    mesh = build_mesh(n_side=n_side)
    cl = classify_mesh(mesh, problem.curve)
    return build_global_space(mesh, cl, problem.beta)


@pytest.fixture(scope="session")
def ellipse():
    return EllipseProblem(1.0, 10.0)


@pytest.fixture(scope="session")
def space10(ellipse):
    return make_space(10, problem=ellipse)


@pytest.fixture(scope="session")
def space20(ellipse):
    return make_space(20, problem=ellipse)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one PASS/FAIL line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
