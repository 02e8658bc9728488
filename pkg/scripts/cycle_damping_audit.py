"""Compare three well-posedness tests on random small digraphs.

The per-cycle damping test ("every fully susceptible interior cycle is
broken") is sufficient for rho < 1 only when cycles cannot leak.  The
closed-class test (no closed, fully susceptible interior class) is exact.
This script counts disagreements of each with rho(S W) < 1 and prints a
minimal counterexample for the first.
"""
import argparse

import numpy as np

from fjbvp.dynamics import check_cycle_damping, closed_undamped_classes, make_problem, spectral_radius
from fjbvp.graph import build_system


def random_case(rng):
    n = int(rng.integers(2, 8))
    s = np.array([0.0, 0.5, 1.0])[rng.integers(0, 3, n)]
    s[rng.integers(n)] = 0.0
    mask = rng.random((n, n)) < rng.uniform(0.15, 0.8)
    np.fill_diagonal(mask, False)
    for i in range(n):
        if not mask[i].any():
            mask[i, (i + 1) % n] = True
    w = np.where(mask, rng.random((n, n)) + 0.05, 0.0)
    return make_problem(build_system(w / w.sum(axis=1, keepdims=True)), s)


def main():
    p = argparse.ArgumentParser(description="cycle-damping audit")
    p.add_argument("--cases", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)

    cycle_bad = class_bad = 0
    for _ in range(args.cases):
        problem = random_case(rng)
        well = spectral_radius(problem) < 1 - 1e-9
        cycle_bad += check_cycle_damping(problem) != well
        class_bad += (not closed_undamped_classes(problem)) != well
    print(f"cases: {args.cases}")
    print(f"cycle-damping test disagreements: {cycle_bad}")
    print(f"closed-class test disagreements:  {class_bad}")

    # Leaky undamped cycle 1 -> 2 -> 3 -> 1 with 3 -> 4 stubborn.
    w = np.array([[0, 1, 0, 0], [0, 0, 1, 0], [0.5, 0, 0, 0.5], [1, 0, 0, 0]])
    problem = make_problem(build_system(w), [1, 1, 1, 0])
    print(
        f"leaky cycle: damping test {check_cycle_damping(problem)}, "
        f"rho {spectral_radius(problem):.4f}, closed classes {closed_undamped_classes(problem)}"
    )


if __name__ == "__main__":
    main()
