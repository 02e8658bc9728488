import numpy as np
import pytest
from hypothesis import strategies as st

from fjbvp.dynamics import make_problem
from fjbvp.graph import build_system, random_walk_system

PATH_ADJ = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)


def random_weights(rng, n, p=0.4, loops=False):
    """Random row-stochastic matrix; every row gets at least one non-loop edge."""
    mask = rng.random((n, n)) < p
    if not loops:
        np.fill_diagonal(mask, False)
    for i in range(n):
        if not mask[i].any() or (mask[i].sum() == 1 and mask[i, i]):
            choices = [j for j in range(n) if j != i]
            mask[i, rng.choice(choices)] = True
    w = np.where(mask, rng.random((n, n)) + 0.05, 0.0)
    return w / w.sum(axis=1, keepdims=True)


def random_system(rng, n, p=0.4, loops=False):
    return build_system(random_weights(rng, n, p, loops))


def random_connected_adjacency(rng, n, p=0.3, weighted=False):
    """Symmetric adjacency with a random spanning tree plus extra edges."""
    a = np.zeros((n, n))
    order = rng.permutation(n)
    for k in range(1, n):
        i, j = order[k], order[rng.integers(k)]
        a[i, j] = a[j, i] = 1.0
    extra = np.triu(rng.random((n, n)) < p, 1)
    a = np.maximum(a, extra + extra.T)
    if weighted:
        r = np.triu(rng.random((n, n)) + 0.1, 1)
        a = a * (r + r.T)
    return a


def random_problem(rng, n, p=0.4, s=None, loops=False):
    """Random problem with at least one stubborn node, psi and phi in [0, 1]."""
    system = random_system(rng, n, p, loops)
    if s is None:
        s = rng.random(n)
        s[rng.integers(n)] = 0.0
    return make_problem(system, s, rng.random(n), rng.random(n))


def iterate(problem, steps):
    v = problem.phi.copy()
    a, b = problem.iteration_matrix, problem.forcing
    for _ in range(steps):
        v = a @ v + b
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path_system():
    return random_walk_system(PATH_ADJ, ["1", "2", "3"])


@pytest.fixture
def path_problem(path_system):
    """Path 1-2-3, boundary {3} at 1, s = 0.5 elsewhere, phi = 0."""
    return make_problem(path_system, [0.5, 0.5, 0.0], psi={2: 1.0})


def weights_strategy(max_n=6):
    """Hypothesis strategy for small row-stochastic matrices."""

    @st.composite
    def build(draw):
        n = draw(st.integers(2, max_n))
        seed = draw(st.integers(0, 2**32 - 1))
        p = draw(st.floats(0.2, 0.9))
        return random_weights(np.random.default_rng(seed), n, p)

    return build()


def problem_strategy(max_n=7):
    @st.composite
    def build(draw):
        n = draw(st.integers(2, max_n))
        seed = draw(st.integers(0, 2**32 - 1))
        return random_problem(np.random.default_rng(seed), n)

    return build()


# ------------------------------------------------------------ acceptance report

ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    """Remember one acceptance line; printed in the terminal summary."""
    ACCEPTANCE[criterion] = f"{'PASS' if passed else 'FAIL'}  criterion {criterion:2d}: {detail}"
    print(ACCEPTANCE[criterion])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
