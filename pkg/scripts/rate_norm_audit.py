"""Where the (s lambda_max)^t contraction holds: Euclidean vs degree-weighted norm.

Uses the path 1-2-3 with node 3 stubborn at 1 and s = 0.5 elsewhere.
"""
import numpy as np

from fjbvp.dynamics import make_problem, steady_state, step
from fjbvp.graph import random_walk_system
from fjbvp.spectral import dirichlet_spectrum, sharpened_rate, weighted_norm


def main():
    system = random_walk_system(np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float))
    problem = make_problem(system, [0.5, 0.5, 0.0], psi={2: 1.0})
    spec = dirichlet_spectrum(system, problem.interior)
    v_star = steady_state(problem).v_star
    v = problem.phi.copy()
    e0 = np.linalg.norm(v - v_star)
    w0 = weighted_norm(spec, v - v_star)
    print(" t   |e_t|_2   bound_2   |e_t|_D   bound_D")
    for t in range(8):
        r = sharpened_rate(spec, 0.5, t)
        print(f"{t:2d}  {np.linalg.norm(v - v_star):8.5f}  {r * e0:8.5f}  {weighted_norm(spec, v - v_star):8.5f}  {r * w0:8.5f}")
        v = step(problem, v)


if __name__ == "__main__":
    main()
