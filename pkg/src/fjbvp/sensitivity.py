"""Steady-state derivatives in the susceptibilities and bounds under changes of W."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DirichletProblem, require_well_posed, steady_state
from .errors import NotInterior, PartitionMismatch

EXACT_INVERSE_MAX = 500
_NORMS = {"inf": np.inf, "one": 1, "two": 2}


@dataclass(frozen=True)
class SensitivityReport:
    node: int
    gradient: np.ndarray
    scalar_factor: float


def residual_drive(problem: DirichletProblem, v_star=None) -> np.ndarray:
    """``W_ii v* + W_ib psi - phi``: what each interior node would move by per unit of ``s``."""
    if v_star is None:
        v_star = steady_state(problem).v_star
    return problem.W_ii @ v_star + problem.W_ib @ problem.psi - problem.phi


def steady_state_gradient(problem: DirichletProblem, k: int) -> SensitivityReport:
    """``d v* / d s_k = r_k G e_k`` for interior node ``k`` (global id)."""
    pos = problem.interior_position(k)
    if pos < 0:
        raise NotInterior(f"node {k} is on the boundary")
    r = residual_drive(problem)
    e = np.zeros(problem.interior.size)
    e[pos] = 1.0
    column = problem.solve(e)
    grad = r[pos] * column
    projected = problem.solve(e * r)
    if not np.allclose(grad, projected, rtol=0, atol=1e-12 * max(1.0, np.abs(grad).max())):
        raise AssertionError("projector and column forms of the gradient disagree")
    return SensitivityReport(int(k), grad, float(r[pos]))


def all_gradients(problem: DirichletProblem) -> list[SensitivityReport]:
    return [steady_state_gradient(problem, int(k)) for k in problem.interior]


def _inverse_norm(problem: DirichletProblem, norm: str) -> tuple[float, str]:
    m = problem.interior.size
    if m <= EXACT_INVERSE_MAX or norm == "two":
        return float(np.linalg.norm(problem.solve(np.eye(m)), _NORMS[norm])), "exact"
    from scipy.sparse.linalg import LinearOperator, onenormest

    t = problem.lu
    import scipy.linalg as sla

    op = LinearOperator(
        (m, m),
        matvec=lambda x: sla.lu_solve(t, x),
        rmatvec=lambda x: sla.lu_solve(t, x, trans=1),
        dtype=float,
    )
    if norm == "inf":
        op = op.T
    # onenormest returns a lower bound; the tag lets callers see it.
    return float(onenormest(op)), "estimate"


@dataclass(frozen=True)
class PerturbationBound:
    bound: float
    actual: float
    norm: str
    method: str
    #: Same bound with ``||A^-1||`` in the boundary term, as the resolvent
    #: identity actually delivers it.
    bound_resolvent: float = float("nan")

    def __iter__(self):
        return iter((self.bound, self.actual))


def perturbation_bound(problem: DirichletProblem, perturbed: DirichletProblem, norm: str = "inf") -> PerturbationBound:
    """Resolvent-identity bound on ``||v*(W) - v*(W~)||`` next to the true difference."""
    if norm not in _NORMS:
        raise ValueError(f"norm must be one of {sorted(_NORMS)}")
    same = (
        np.array_equal(problem.interior, perturbed.interior)
        and np.array_equal(problem.s, perturbed.s)
        and np.array_equal(problem.psi, perturbed.psi)
        and np.array_equal(problem.phi, perturbed.phi)
    )
    if not same:
        raise PartitionMismatch("problems must share the partition, S, psi and phi")
    require_well_posed(problem)
    require_well_posed(perturbed)
    ord_ = _NORMS[norm]
    a_inv, m1 = _inverse_norm(problem, norm)
    at_inv, m2 = _inverse_norm(perturbed, norm)
    s_norm = float(problem.s_int.max()) if problem.s_int.size else 0.0
    d_ii = problem.W_ii - perturbed.W_ii
    d_ib = problem.W_ib - perturbed.W_ib
    mnorm = lambda x: float(np.linalg.norm(x, ord_)) if x.size else 0.0
    vnorm = lambda x: float(np.linalg.norm(x, ord_)) if x.size else 0.0
    interior_term = a_inv * s_norm * mnorm(d_ii) * at_inv * vnorm(perturbed.forcing)
    boundary_term = s_norm * mnorm(d_ib) * vnorm(problem.psi)
    bound = interior_term + at_inv * boundary_term
    bound_resolvent = interior_term + a_inv * boundary_term
    actual = vnorm(steady_state(problem).v_star - steady_state(perturbed).v_star)
    method = "exact" if m1 == m2 == "exact" else "estimate"
    return PerturbationBound(bound, actual, norm, method, bound_resolvent)
