import numpy as np
import pytest
from hypothesis import given, settings

from fjbvp.dynamics import make_problem, steady_state
from fjbvp.errors import NotInterior, PartitionMismatch
from fjbvp.graph import build_system
from fjbvp.sensitivity import all_gradients, perturbation_bound, residual_drive, steady_state_gradient

from conftest import problem_strategy, random_problem, random_weights


def finite_difference(problem, k, h=1e-6):
    s_up = problem.s.copy()
    s_dn = problem.s.copy()
    s_up[k] += h
    s_dn[k] -= h
    up = steady_state(problem.with_susceptibility(s_up)).v_star
    dn = steady_state(problem.with_susceptibility(s_dn)).v_star
    return (up - dn) / (2 * h)


@settings(max_examples=40, deadline=None)
@given(problem_strategy(7))
def test_gradient_matches_finite_difference(problem):
    for k in problem.interior:
        if not 1e-5 < problem.s[k] < 1 - 1e-5:
            continue
        g = steady_state_gradient(problem, int(k)).gradient
        fd = finite_difference(problem, int(k))
        assert np.allclose(g, fd, rtol=1e-5, atol=1e-8)


def test_consensus_gradient_is_zero(rng):
    w = random_weights(rng, 6)
    s = rng.random(6)
    s[0] = 0.0
    problem = make_problem(build_system(w), s, np.full(6, 0.4), np.full(6, 0.4))
    for rep in all_gradients(problem):
        assert np.max(np.abs(rep.gradient)) <= 1e-12
        assert abs(rep.scalar_factor) <= 1e-12


def test_path_gradient(path_problem):
    rep = steady_state_gradient(path_problem, 1)
    r = residual_drive(path_problem)
    assert rep.scalar_factor == pytest.approx(r[1])
    assert np.allclose(rep.gradient, finite_difference(path_problem, 1), rtol=1e-6)


def test_boundary_node_rejected(path_problem):
    with pytest.raises(NotInterior):
        steady_state_gradient(path_problem, 2)


def perturbed_pair(rng, n, scale=0.2):
    base = random_problem(rng, n)
    w = base.system.weights
    noise = random_weights(rng, n, 0.5)
    w2 = (1 - scale) * w + scale * noise
    return base, base.with_weights(build_system(w2))


@pytest.mark.parametrize("norm", ["inf", "one", "two"])
def test_perturbation_bound_holds(rng, norm):
    for _ in range(40):
        a, b = perturbed_pair(rng, int(rng.integers(3, 9)), float(rng.uniform(0.01, 0.5)))
        res = perturbation_bound(a, b, norm)
        bound, actual = res
        assert actual <= bound * (1 + 1e-10) + 1e-14
        assert actual <= res.bound_resolvent * (1 + 1e-10) + 1e-14


def test_perturbation_bound_zero_for_identical(rng):
    a = random_problem(rng, 6)
    res = perturbation_bound(a, a)
    assert res.actual == 0.0 and res.bound == 0.0


def test_partition_mismatch(rng):
    a = random_problem(rng, 5)
    s = a.s.copy()
    s[a.interior[0]] = 0.0
    with pytest.raises(PartitionMismatch):
        perturbation_bound(a, a.with_susceptibility(s))


def test_estimate_path_for_large_interior(rng):
    a, b = perturbed_pair(rng, 520, 0.1)
    res = perturbation_bound(a, b, "inf")
    assert res.method == "estimate"
    assert res.actual <= res.bound
