"""Acceptance gate: the fourteen numbered criteria at their stated tolerances.

Each test records one PASS/FAIL line (shown in the pytest terminal summary)
and then asserts.  Run ``python3 tests/test_acceptance.py`` to print the lines
without pytest.
"""
import csv
import itertools
import json
import time

import numpy as np
import pytest

from fjbvp.broadcasting import broadcasting_graph, log_distances
from fjbvp.cli import main as cli_main
from fjbvp.dynamics import (
    boundary_reachable,
    check_cycle_damping,
    closed_undamped_classes,
    error_recursion_check,
    green_operator,
    make_problem,
    spectral_radius,
    steady_state,
    step,
)
from fjbvp.graph import build_system, directed_distances, karate_club, random_walk_system
from fjbvp.influence import influence_matrix, scan_all_vertices, volumes
from fjbvp.sensitivity import perturbation_bound, steady_state_gradient
from fjbvp.spectral import dirichlet_spectrum, sharpened_rate, spectral_green, weighted_norm

from conftest import iterate, random_connected_adjacency, random_problem, random_weights, record

SEED = 20240601


# ------------------------------------------------------------------ 1


def test_criterion_01_steady_state_oracle():
    rng = np.random.default_rng(SEED + 1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 26))
        problem = random_problem(rng, n, p=float(rng.uniform(0.1, 0.6)))
        v = steady_state(problem).v_star
        worst = max(worst, float(np.max(np.abs(v - iterate(problem, 10_000)), initial=0.0)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 30
    record(1, ok, f"200 problems, max |resolvent - 1e4 iterations| = {worst:.2e} (<= 1e-9), {elapsed:.1f} s (< 30 s)")
    assert ok


# ------------------------------------------------------------------ 2


def test_criterion_02_error_recursion():
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(50):
        problem = random_problem(rng, int(rng.integers(2, 16)))
        for t in range(51):
            lhs, rhs = error_recursion_check(problem, t)
            worst = max(worst, float(np.max(np.abs(lhs - rhs), initial=0.0)))
    ok = worst <= 1e-12
    record(2, ok, f"50 instances, t <= 50, max deviation = {worst:.2e} (<= 1e-12)")
    assert ok


# ------------------------------------------------------------------ 3


def cycle_cases(count, rng):
    """Random row-stochastic digraphs, n <= 7, s in {0, 0.5, 1}^n with a nonempty boundary."""
    levels = np.array([0.0, 0.5, 1.0])
    made = 0
    while made < count:
        n = int(rng.integers(2, 8))
        s = levels[rng.integers(0, 3, n)]
        if not np.any(s == 0):
            continue
        w = random_weights(rng, n, float(rng.uniform(0.15, 0.8)), loops=bool(rng.random() < 0.3))
        made += 1
        yield make_problem(build_system(w), s)


def test_criterion_03_cycle_damping():
    rng = np.random.default_rng(SEED + 3)
    cases = disagree = exact_disagree = 0
    example = None
    for problem in cycle_cases(10_000, rng):
        well = spectral_radius(problem) < 1 - 1e-9 if problem.interior.size else True
        cases += 1
        if check_cycle_damping(problem) != well:
            disagree += 1
            if example is None:
                example = (problem.s.tolist(), problem.system.weights.round(3).tolist())
        if (not closed_undamped_classes(problem)) != well:
            exact_disagree += 1
    ok = cases >= 10_000 and disagree == 0
    record(
        3,
        ok,
        f"{cases} cases, cycle-damping test vs rho < 1 - 1e-9: {disagree} disagreements (need 0); "
        f"closed-class test: {exact_disagree} disagreements",
    )
    assert ok, f"first disagreement: s={example[0]}, W={example[1]}"


# ------------------------------------------------------------------ 4


def test_criterion_04_sensitivity():
    rng = np.random.default_rng(SEED + 4)
    h = 1e-6
    worst = 0.0
    checked = 0
    while checked < 100:
        problem = random_problem(rng, int(rng.integers(3, 12)))
        ks = [int(k) for k in problem.interior if 10 * h < problem.s[k] < 1 - 10 * h]
        if not ks:
            continue
        k = ks[int(rng.integers(len(ks)))]
        g = steady_state_gradient(problem, k).gradient
        up, dn = problem.s.copy(), problem.s.copy()
        up[k] += h
        dn[k] -= h
        fd = (steady_state(problem.with_susceptibility(up)).v_star - steady_state(problem.with_susceptibility(dn)).v_star) / (2 * h)
        worst = max(worst, float(np.max(np.abs(g - fd)) / np.max(np.abs(g))))
        checked += 1
    consensus = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 12))
        s = rng.random(n)
        s[0] = 0
        c = float(rng.random())
        problem = make_problem(build_system(random_weights(rng, n)), s, np.full(n, c), np.full(n, c))
        for k in problem.interior:
            consensus = max(consensus, float(np.max(np.abs(steady_state_gradient(problem, int(k)).gradient))))
    ok = worst <= 1e-5 and consensus <= 1e-12
    record(4, ok, f"100 instances, max relative error vs central differences = {worst:.2e} (<= 1e-5); consensus gradient max = {consensus:.1e} (<= 1e-12)")
    assert ok


# ------------------------------------------------------------------ 5


def test_criterion_05_perturbation_bound():
    rng = np.random.default_rng(SEED + 5)
    violations = {"inf": 0, "one": 0, "two": 0}
    tightest = {k: 0.0 for k in violations}
    for _ in range(1000):
        n = int(rng.integers(3, 15))
        base = random_problem(rng, n)
        scale = float(rng.uniform(0.001, 0.9))
        w2 = (1 - scale) * base.system.weights + scale * random_weights(rng, n, float(rng.uniform(0.2, 0.8)))
        pert = base.with_weights(build_system(w2 / w2.sum(axis=1, keepdims=True)))
        for norm in violations:
            res = perturbation_bound(base, pert, norm)
            if res.actual > res.bound:
                violations[norm] += 1
            if res.bound > 0:
                tightest[norm] = max(tightest[norm], res.actual / res.bound)
    ok = not any(violations.values())
    record(
        5,
        ok,
        "1000 pairs, violations inf/one/two = {inf}/{one}/{two} (need 0); ".format(**violations)
        + "max actual/bound = " + "/".join(f"{tightest[k]:.3f}" for k in ("inf", "one", "two")),
    )
    assert ok


# ------------------------------------------------------------------ 6, 7


def spectral_instances():
    rng = np.random.default_rng(SEED + 6)
    out = []
    for _ in range(50):
        n = int(rng.integers(3, 51))
        a = random_connected_adjacency(rng, n, float(rng.uniform(0.02, 0.3)))
        system = random_walk_system(a)
        boundary = rng.choice(n, int(rng.integers(1, max(2, n // 4))), replace=False)
        interior = np.setdiff1d(np.arange(n), boundary)
        out.append((system, interior, rng.random(n), rng.random(n)))
    return out


def test_criterion_06_spectral_green():
    worst = 0.0
    for system, interior, _, _ in spectral_instances():
        spec = dirichlet_spectrum(system, interior)
        for s in (0.3, 0.7, 0.95):
            sv = np.zeros(system.n)
            sv[interior] = s
            g = green_operator(make_problem(system, sv))
            worst = max(worst, float(np.max(np.abs(spectral_green(spec, s) - g))))
    ok = worst <= 1e-8
    record(6, ok, f"50 graphs x 3 susceptibilities, max |spectral G - LU G| = {worst:.2e} (<= 1e-8)")
    assert ok


FLOAT_FLOOR = 1e-12  # errors below this are roundoff in v*, not dynamics


def test_criterion_07_sharpened_rate():
    violations = weighted_violations = checks = 0
    worst_ratio = 0.0
    for system, interior, psi, phi in spectral_instances():
        spec = dirichlet_spectrum(system, interior)
        for s in (0.3, 0.7, 0.95):
            sv = np.zeros(system.n)
            sv[interior] = s
            problem = make_problem(system, sv, psi, phi)
            v_star = steady_state(problem).v_star
            e0 = np.linalg.norm(problem.phi - v_star)
            w0 = weighted_norm(spec, problem.phi - v_star)
            v = problem.phi.copy()
            for t in range(101):
                rate = sharpened_rate(spec, s, t)
                err = np.linalg.norm(v - v_star)
                checks += 1
                if err > rate * e0 + FLOAT_FLOOR:
                    violations += 1
                    worst_ratio = max(worst_ratio, err / (rate * e0))
                if weighted_norm(spec, v - v_star) > rate * w0 + FLOAT_FLOOR:
                    weighted_violations += 1
                v = step(problem, v)
    ok = violations == 0
    record(
        7,
        ok,
        f"{checks} checks, 2-norm violations above {FLOAT_FLOOR:g} = {violations} (need 0, worst ratio {worst_ratio:.3g}); "
        f"degree-weighted norm violations = {weighted_violations}",
    )
    assert ok


# ------------------------------------------------------------------ 8


def test_criterion_08_scan_distances():
    rng = np.random.default_rng(SEED + 8)
    equal = transposed = 0
    for _ in range(100):
        n = int(rng.integers(2, 16))
        system = build_system(random_weights(rng, n, float(rng.uniform(0.1, 0.6))))
        s = rng.uniform(0.05, 1.0, n)
        scan = scan_all_vertices(system, s)
        d = directed_distances(system)
        equal += bool(np.array_equal(scan.T, d))
        transposed += bool(np.array_equal(scan.T, d.T))
    ok = equal == 100
    record(8, ok, f"100 digraphs, T == BFS distances of the support graph on {equal}/100; T == transposed BFS on {transposed}/100")
    assert ok


# ------------------------------------------------------------------ 9


def test_criterion_09_influence_matrix():
    rng = np.random.default_rng(SEED + 9)
    bad_entries = bad_rows = bad_monotone = 0
    for _ in range(200):
        n = int(rng.integers(3, 15))
        system = build_system(random_weights(rng, n, float(rng.uniform(0.15, 0.7))))
        s = rng.random(n)
        s[rng.choice(n, int(rng.integers(1, n)), replace=False)] = 0.0
        s2 = np.where(s > 0, s + rng.random(n) * (1 - s), 0.0)
        u1 = influence_matrix(system, s)
        u2 = influence_matrix(system, s2)
        bad_entries += int(np.sum((u1.U < 0) | (u1.U > 1)))
        reach = boundary_reachable(make_problem(system, s))
        rows = u1.row_sums[reach]
        bad_rows += int(np.sum((rows <= 0) | (rows > 1 + 1e-12)))
        bad_monotone += int(np.sum(u1.U > u2.U + 1e-12))
    ok = bad_entries == bad_rows == bad_monotone == 0
    record(9, ok, f"200 pairs s <= s', violations: entries {bad_entries}, row sums {bad_rows}, monotonicity {bad_monotone} (need 0)")
    assert ok


# ------------------------------------------------------------------ 10


def test_criterion_10_balance():
    rng = np.random.default_rng(SEED + 10)
    worst = 0.0
    bad_range = 0
    for k in range(100):
        if k % 4 == 0:
            system = karate_club()
        else:
            system = build_system(random_weights(rng, int(rng.integers(2, 30)), float(rng.uniform(0.1, 0.6))))
        n = system.n
        s = np.where(rng.random(n) < 0.15, 0.0, rng.random(n))
        out_v, in_v, total = volumes(scan_all_vertices(system, s, responses_only=True))
        worst = max(worst, abs(float(out_v.sum()) - float(in_v.sum())))
        bad_range += not (0 <= total <= n * (n - 1))
    ok = worst <= 1e-12 and bad_range == 0
    record(10, ok, f"100 scans, max |sum out - sum in| = {worst:.1e} (<= 1e-12), range violations {bad_range}")
    assert ok


# ------------------------------------------------------------------ 11, 13, 14


@pytest.fixture(scope="module")
def campaigns(tmp_path_factory):
    """The default R = 2000 karate campaign through the CLI at 1 and 8 workers."""
    root = tmp_path_factory.mktemp("campaign")
    timings = {}
    for threads in (1, 8):
        start = time.perf_counter()
        code = cli_main(["campaign", "--runs", "2000", "--threads", str(threads), "-o", str(root / f"t{threads}")])
        timings[threads] = time.perf_counter() - start
        assert code == 0
    return root, timings


def test_criterion_11_broadcasting_bounds(campaigns):
    root, _ = campaigns
    summary = json.loads((root / "t1" / "summary.json").read_text())
    v = summary["bound_violations"]
    ok = summary["valid_runs"] == 2000 and sum(v.values()) == 0
    record(11, ok, f"{summary['valid_runs']} runs, bound violations {v} (need all 0)")
    assert ok


def max_path_products(w):
    n = w.shape[0]
    best = np.eye(n)
    for i, j in itertools.permutations(range(n), 2):
        others = [k for k in range(n) if k not in (i, j)]
        for r in range(len(others) + 1):
            for mid in itertools.permutations(others, r):
                p = (i, *mid, j)
                best[i, j] = max(best[i, j], float(np.prod([w[a, b] for a, b in zip(p, p[1:])])))
    return best


def test_criterion_12_log_distance_products():
    rng = np.random.default_rng(SEED + 12)
    worst = 0.0
    for _ in range(60):
        n = int(rng.integers(2, 8))
        system = build_system(random_weights(rng, n, float(rng.uniform(0.2, 0.9))))
        s = np.where(rng.random(n) < 0.2, 0.0, rng.uniform(0.05, 0.95, n))
        bg = broadcasting_graph(system, scan_all_vertices(system, s, responses_only=True))
        prod = np.exp(-log_distances(bg))
        best = max_path_products(bg.weights)
        mask = best > 0
        worst = max(worst, float(np.max(np.abs(prod[mask] - best[mask]) / best[mask])))
        assert np.all(prod[~mask] == 0)
    ok = worst <= 1e-9
    record(12, ok, f"60 graphs n <= 7, max relative |exp(-d_log) - best path product| = {worst:.1e} (<= 1e-9)")
    assert ok


def test_criterion_13_karate_campaign(campaigns):
    root, timings = campaigns
    out = root / "t1"
    with open(out / "correlations.csv") as fh:
        rows = {r["measure"]: r for r in csv.DictReader(fh)}
    pearson = {m: float(r["pearson"]) for m, r in rows.items()}
    occupied = {}
    for m in pearson:
        with open(out / "histograms" / f"{m}.csv") as fh:
            occupied[m] = sum(int(r["count"]) > 0 for r in csv.DictReader(fh))
    ok = pearson["obdeg"] >= 0.9 and min(pearson.values()) >= 0.6 and min(occupied.values()) >= 5 and timings[1] <= 600
    record(
        13,
        ok,
        "Pearson " + ", ".join(f"{m} {p:.3f}" for m, p in pearson.items())
        + "; occupied bins " + "/".join(str(occupied[m]) for m in pearson)
        + f" of 30; {timings[1]:.0f} s",
    )
    assert ok


def test_criterion_14_determinism(campaigns):
    root, _ = campaigns
    a, b = root / "t1", root / "t8"
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    differing = [str(f) for f in files if (a / f).read_bytes() != (b / f).read_bytes()]
    same_set = files == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    ok = same_set and not differing
    record(14, ok, f"{len(files)} files compared between 1 and 8 workers, {len(differing)} differ (need 0)")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
