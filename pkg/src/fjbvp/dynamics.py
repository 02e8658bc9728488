"""Friedkin-Johnsen dynamics as a Dirichlet problem on the interior nodes.

Nodes with ``s_i > 0`` form the interior; stubborn nodes (``s_i = 0``) are
the boundary and keep their opinion ``psi`` forever.  The interior evolves as

    v[t+1] = S W_ii v[t] + S W_ib psi + (I - S) phi

and, when the iteration matrix ``A = S W_ii`` has spectral radius below one,
settles at ``(I - A)^-1 (S W_ib psi + (I - S) phi)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    CapReached,
    DimensionMismatch,
    EmptyBoundary,
    NeumannNotConverged,
    NotWellPosed,
)
from .graph import InfluenceSystem, _out_lists, bfs_hops

RHO_MARGIN = 1e-12
POWER_TOL = 1e-12
POWER_MAXITER = 100_000
DENSE_EIG_MAX = 64


def validate_susceptibility(s, n: int | None = None) -> np.ndarray:
    s = np.asarray(s, dtype=float).ravel()
    if n is not None and s.size != n:
        raise DimensionMismatch(f"susceptibility has length {s.size}, expected {n}")
    if np.any(~np.isfinite(s)) or np.any(s < 0) or np.any(s > 1):
        raise ValueError("susceptibilities must lie in [0, 1]")
    return s


def partition(s) -> tuple[np.ndarray, np.ndarray]:
    """Split nodes into (interior, boundary) index arrays, both ascending."""
    s = validate_susceptibility(s)
    boundary = np.flatnonzero(s == 0)
    if boundary.size == 0:
        raise EmptyBoundary("every node is susceptible; at least one stubborn node is required")
    return np.flatnonzero(s > 0), boundary


def _spread(values, n: int, name: str) -> np.ndarray:
    """Accept a full-length vector, a {node: value} mapping, or None (zeros)."""
    out = np.zeros(n)
    if values is None:
        return out
    if isinstance(values, dict):
        for k, v in values.items():
            k = int(k)
            if not 0 <= k < n:
                raise DimensionMismatch(f"{name} refers to node {k} outside 0..{n - 1}")
            out[k] = float(v)
        return out
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size != n:
        raise DimensionMismatch(f"{name} has length {arr.size}, expected {n}")
    return arr.copy()


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    """``(W, S, psi, phi)`` with the interior/boundary blocks pre-extracted.

    Build it with :func:`make_problem`; ``psi`` is indexed like ``boundary``
    and ``phi`` like ``interior``.
    """

    system: InfluenceSystem
    s: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    interior: np.ndarray = field(init=False)
    boundary: np.ndarray = field(init=False)

    def __post_init__(self):
        interior, boundary = partition(self.s)
        if self.psi.size != boundary.size:
            raise DimensionMismatch(f"psi has length {self.psi.size}, boundary has {boundary.size} nodes")
        if self.phi.size != interior.size:
            raise DimensionMismatch(f"phi has length {self.phi.size}, interior has {interior.size} nodes")
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "boundary", boundary)

    @property
    def n(self) -> int:
        return self.system.n

    @cached_property
    def s_int(self) -> np.ndarray:
        return self.s[self.interior]

    @cached_property
    def W_ii(self) -> np.ndarray:
        return self.system.weights[np.ix_(self.interior, self.interior)]

    @cached_property
    def W_ib(self) -> np.ndarray:
        return self.system.weights[np.ix_(self.interior, self.boundary)]

    @cached_property
    def iteration_matrix(self) -> np.ndarray:
        """``A = S_int W_ii``."""
        return self.s_int[:, None] * self.W_ii

    @cached_property
    def forcing(self) -> np.ndarray:
        """``b = S W_ib psi + (I - S) phi``."""
        return self.s_int * (self.W_ib @ self.psi) + (1.0 - self.s_int) * self.phi

    @cached_property
    def lu(self):
        m = self.interior.size
        return sla.lu_factor(np.eye(m) - self.iteration_matrix, check_finite=False)

    def solve(self, rhs) -> np.ndarray:
        """Solve ``(I - A) x = rhs`` with the cached factorisation."""
        return sla.lu_solve(self.lu, np.asarray(rhs, dtype=float), check_finite=False)

    def full_state(self, v_interior) -> np.ndarray:
        v = np.empty(self.n)
        v[self.interior] = v_interior
        v[self.boundary] = self.psi
        return v

    def interior_position(self, node: int) -> int:
        pos = np.searchsorted(self.interior, node)
        if pos < self.interior.size and self.interior[pos] == node:
            return int(pos)
        return -1

    def with_weights(self, system: InfluenceSystem) -> "DirichletProblem":
        return DirichletProblem(system, self.s, self.psi, self.phi)

    def with_susceptibility(self, s) -> "DirichletProblem":
        """Same full psi/phi data under a new susceptibility profile."""
        full_psi = np.zeros(self.n)
        full_psi[self.boundary] = self.psi
        full_phi = np.zeros(self.n)
        full_phi[self.interior] = self.phi
        return make_problem(self.system, s, full_psi, full_phi)


def make_problem(system: InfluenceSystem, s, psi=None, phi=None) -> DirichletProblem:
    """Build a problem from full-length (or ``{node: value}``) boundary and initial data.

    Entries of ``psi`` on interior nodes and of ``phi`` on boundary nodes are
    ignored; missing entries default to 0.
    """
    s = validate_susceptibility(s, system.n)
    psi_full = _spread(psi, system.n, "psi")
    phi_full = _spread(phi, system.n, "phi")
    interior, boundary = partition(s)
    return DirichletProblem(system, s, psi_full[boundary], phi_full[interior])


# ------------------------------------------------------------ well-posedness


def _interior_components(problem: DirichletProblem):
    sup = csr_matrix(problem.W_ii > 0)
    return connected_components(sup, directed=True, connection="strong")


def boundary_reachable(problem: DirichletProblem) -> np.ndarray:
    """Mask over interior nodes: does the node have a directed path into the boundary?"""
    n = problem.n
    # Reverse BFS from a virtual node that points at every boundary node.
    rev = problem.system.support.T
    lists = _out_lists(rev) + [problem.boundary]
    d = bfs_hops(lists, n)
    return d[problem.interior] < np.iinfo(np.int64).max


def undamped_cycles(problem: DirichletProblem) -> list[list[int]]:
    """Interior node sets that carry a directed cycle made only of ``s_i = 1`` nodes.

    Each entry is a strongly connected component (or a self-loop node) of the
    subgraph induced by fully susceptible interior nodes, as global node ids.
    """
    full = np.flatnonzero(problem.s_int == 1.0)
    if full.size == 0:
        return []
    sub = problem.W_ii[np.ix_(full, full)] > 0
    ncomp, labels = connected_components(csr_matrix(sub), directed=True, connection="strong")
    cycles = []
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        if members.size > 1 or sub[members[0], members[0]]:
            cycles.append(sorted(int(problem.interior[full[m]]) for m in members))
    return cycles


def check_cycle_damping(problem: DirichletProblem) -> bool:
    """True iff every directed interior cycle contains a node with ``s_i < 1``."""
    return not undamped_cycles(problem)


def closed_undamped_classes(problem: DirichletProblem) -> list[list[int]]:
    """Interior classes that trap all of their influence mass with no damping.

    A strongly connected interior component ``C`` whose nodes all have
    ``s_i = 1`` and whose rows of ``W`` put no weight outside ``C`` makes
    ``W_CC`` row-stochastic, so ``rho(S W_ii) = 1``.  Conversely every other
    component has a damped or leaking row and contributes ``rho < 1``; an
    empty result is therefore equivalent to ``rho(S W_ii) < 1``.
    """
    if problem.interior.size == 0:
        return []
    ncomp, labels = _interior_components(problem)
    w = problem.system.weights
    classes = []
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        nodes = problem.interior[members]
        if np.any(problem.s_int[members] != 1.0):
            continue
        if members.size == 1 and problem.W_ii[members[0], members[0]] == 0:
            continue
        outside = np.ones(problem.n, dtype=bool)
        outside[nodes] = False
        if not np.any(w[np.ix_(nodes, np.flatnonzero(outside))] > 0):
            classes.append(sorted(int(v) for v in nodes))
    return classes


def spectral_radius(problem: DirichletProblem) -> float:
    """``rho(S W_ii)``: dense eigenvalues for small interiors, power iteration otherwise."""
    a = problem.iteration_matrix
    m = a.shape[0]
    if m == 0:
        return 0.0
    if m > DENSE_EIG_MAX:
        rho = _power_rho(a)
        if rho is not None:
            return rho
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def _power_rho(a: np.ndarray) -> float | None:
    x = np.ones(a.shape[0])
    x /= np.linalg.norm(x)
    prev = np.inf
    for _ in range(POWER_MAXITER):
        y = a @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        rq = float(x @ y)
        x = y / norm
        if abs(rq - prev) <= POWER_TOL * max(1.0, abs(rq)):
            # Rayleigh quotient of a nonnegative matrix under-reports rho
            # when the Perron vector is far from symmetric; use the norm ratio.
            return float(np.linalg.norm(a @ x))
        prev = rq
    return None


@dataclass(frozen=True)
class WellPosedness:
    reachable: bool
    damped: bool
    closed_classes: list
    undamped_cycles: list
    rho: float

    @property
    def ok(self) -> bool:
        return not self.closed_classes and self.rho < 1.0 - RHO_MARGIN

    def describe(self) -> str:
        parts = [f"rho={self.rho:.6g}"]
        if self.closed_classes:
            parts.append(f"closed undamped class {self.closed_classes[0]}")
        if not self.reachable:
            parts.append("some interior node cannot reach the boundary")
        if not self.damped:
            parts.append(f"undamped cycle {self.undamped_cycles[0]}")
        return "; ".join(parts)


def diagnose(problem: DirichletProblem) -> WellPosedness:
    """Run every well-posedness gate and report which ones fail."""
    cycles = undamped_cycles(problem)
    return WellPosedness(
        reachable=bool(np.all(boundary_reachable(problem))),
        damped=not cycles,
        closed_classes=closed_undamped_classes(problem),
        undamped_cycles=cycles,
        rho=spectral_radius(problem),
    )


def require_well_posed(problem: DirichletProblem) -> WellPosedness:
    wp = diagnose(problem)
    if not wp.ok:
        witness = wp.closed_classes[0] if wp.closed_classes else (wp.undamped_cycles or [None])[0]
        raise NotWellPosed(
            f"steady state is not unique: {wp.describe()}",
            rho=wp.rho,
            witness=witness,
            reason="closed-class" if wp.closed_classes else "spectral-radius",
        )
    return wp


# ------------------------------------------------------------------- solving


@dataclass(frozen=True)
class SteadyState:
    v_star: np.ndarray
    rho: float
    residual: float
    method: str = "lu"

    def full(self, problem: DirichletProblem) -> np.ndarray:
        return problem.full_state(self.v_star)


def step(problem: DirichletProblem, v_interior) -> np.ndarray:
    v = np.asarray(v_interior, dtype=float)
    if v.shape != (problem.interior.size,):
        raise DimensionMismatch(f"state has shape {v.shape}, interior has {problem.interior.size} nodes")
    return problem.iteration_matrix @ v + problem.forcing


def steady_state(problem: DirichletProblem) -> SteadyState:
    """Interior steady state by LU solve of ``(I - A) v = b``."""
    if problem.interior.size == 0:
        return SteadyState(np.zeros(0), 0.0, 0.0)
    wp = require_well_posed(problem)
    v = problem.solve(problem.forcing)
    res = float(np.max(np.abs(v - problem.iteration_matrix @ v - problem.forcing)))
    return SteadyState(v, wp.rho, res)


def transient(problem: DirichletProblem, t: int) -> np.ndarray:
    """Closed-form interior state ``A^t phi + sum_{k<t} A^k b``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    a = problem.iteration_matrix
    b = problem.forcing
    term = b.copy()
    acc = np.zeros_like(b)
    power_phi = problem.phi.copy()
    for _ in range(t):
        acc += term
        term = a @ term
        power_phi = a @ power_phi
    return power_phi + acc


def trajectory(problem: DirichletProblem, horizon: int) -> np.ndarray:
    """Full-length states ``v^0..v^horizon`` as rows; boundary columns stay at ``psi``."""
    states = np.empty((horizon + 1, problem.n))
    v = problem.phi.copy()
    states[0] = problem.full_state(v)
    for t in range(1, horizon + 1):
        v = step(problem, v)
        states[t] = problem.full_state(v)
    return states


def error_recursion_check(problem: DirichletProblem, t: int):
    """Both sides of ``v_t - v* = A^t (phi - v*)`` for comparison."""
    v_star = steady_state(problem).v_star
    v = problem.phi.copy()
    for _ in range(t):
        v = step(problem, v)
    rhs = np.linalg.matrix_power(problem.iteration_matrix, t) @ (problem.phi - v_star)
    return v - v_star, rhs


def rate_bound(problem: DirichletProblem, delta: float, t_max: int = 1000):
    """Constant ``C`` and curve ``C (rho + delta)^t ||phi - v*||_inf`` for ``t = 0..t_max``.

    ``C`` is the largest ratio ``||A^t|| / (rho + delta)^t`` up to the first
    ``t0`` with ``||A^t0|| <= (rho + delta)^t0``; submultiplicativity then
    extends the bound to every ``t``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    v_star = steady_state(problem).v_star
    a = problem.iteration_matrix
    r = spectral_radius(problem) + delta
    c = 1.0
    power = np.eye(a.shape[0])
    t0 = None
    for t in range(1, t_max + 1):
        power = power @ a
        nrm = np.linalg.norm(power, np.inf) if power.size else 0.0
        c = max(c, nrm / r**t)
        if nrm <= r**t:
            t0 = t
            break
    if t0 is None:
        raise CapReached(f"||A^t||^(1/t) did not drop below rho+delta={r:.6g} by t={t_max}")
    e0 = np.linalg.norm(problem.phi - v_star, np.inf) if v_star.size else 0.0
    curve = c * r ** np.arange(t_max + 1) * e0
    return c, curve


def green_operator(problem: DirichletProblem, method: str = "factorization", k_max: int = 10_000, tol: float = 1e-14) -> np.ndarray:
    """Materialise ``G = (I - A)^-1`` by LU or by a truncated Neumann series."""
    require_well_posed(problem)
    m = problem.interior.size
    if method == "factorization":
        return problem.solve(np.eye(m))
    if method != "neumann":
        raise ValueError(f"unknown method {method!r}")
    a = problem.iteration_matrix
    term = np.eye(m)
    g = term.copy()
    for _ in range(k_max):
        term = a @ term
        g += term
        if np.linalg.norm(term, np.inf) <= tol:
            return g
    raise NeumannNotConverged(f"Neumann series term still above {tol} after {k_max} terms")
