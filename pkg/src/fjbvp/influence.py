"""Influenceability: kick-off and stabilisation times, the influence matrix, all-vertex scans.

Influence travels against the support edges: node ``j`` hears node ``k``
when ``W[j, k] > 0``.  Kick-off times are therefore hop distances on the
reversed support graph.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    RHO_MARGIN,
    DirichletProblem,
    closed_undamped_classes,
    make_problem,
    require_well_posed,
    steady_state,
    validate_susceptibility,
)
from .graph import UNREACHABLE, InfluenceSystem, _out_lists, bfs_hops

KICKOFF_THRESHOLD = 1e-14
DEFAULT_EPSILON = 1e-6
DEFAULT_T_CAP = 1_000_000


@dataclass(frozen=True)
class NodeDiagnostics:
    """Per-node arrays over all ``n`` nodes; times use ``UNREACHABLE`` for infinity."""

    kickoff: np.ndarray
    germinated: np.ndarray
    stabilization: np.ndarray
    steady: np.ndarray
    kickoff_numeric: np.ndarray
    epsilon: float

    @property
    def capped(self) -> np.ndarray:
        return self.stabilization == UNREACHABLE


def _propagation_lists(system: InfluenceSystem):
    return _out_lists(system.support.T)


def node_diagnostics(problem: DirichletProblem, epsilon: float = DEFAULT_EPSILON, t_cap: int = DEFAULT_T_CAP) -> NodeDiagnostics:
    """Kick-off time, germinated opinion, stabilisation time and steady value of each node.

    With ``phi = 0`` and one-signed ``psi`` the kick-off time is the hop
    distance from the nonzero boundary nodes (exact, immune to underflow);
    otherwise it is read off the simulated trajectory with threshold 1e-14.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = problem.n
    steady = steady_state(problem).full(problem)
    structural = not np.any(problem.phi) and (np.all(problem.psi >= 0) or np.all(problem.psi <= 0))

    v = problem.full_state(problem.phi)
    kick_num = np.full(n, UNREACHABLE, dtype=np.int64)
    germ_num = np.zeros(n)
    stab = np.full(n, UNREACHABLE, dtype=np.int64)
    horizon = n  # a nonzero value must appear within n steps if it ever does
    t = 0
    phi_int = problem.phi
    while True:
        hit = (kick_num == UNREACHABLE) & (np.abs(v) > KICKOFF_THRESHOLD)
        kick_num[hit] = t
        germ_num[hit] = v[hit]
        stab[(stab == UNREACHABLE) & (np.abs(v - steady) < epsilon)] = t
        if (t >= horizon and not np.any(stab == UNREACHABLE)) or t >= t_cap:
            break
        phi_int = problem.iteration_matrix @ phi_int + problem.forcing
        v[problem.interior] = phi_int
        t += 1

    if structural:
        sources = problem.boundary[problem.psi != 0]
        lists = _propagation_lists(problem.system) + [sources]
        allowed = np.zeros(n + 1, dtype=bool)
        allowed[problem.interior] = True
        allowed[sources] = True
        d = bfs_hops(lists, n, allowed=allowed)[:n]
        kick = np.where(d == UNREACHABLE, UNREACHABLE, d - 1)
        germ = _germinated_at(problem, kick)
    else:
        kick, germ = kick_num, germ_num
    return NodeDiagnostics(kick, germ, stab, steady, kick_num, float(epsilon))


def _germinated_at(problem: DirichletProblem, kick: np.ndarray) -> np.ndarray:
    finite = kick[kick != UNREACHABLE]
    if finite.size == 0:
        return np.zeros(problem.n)
    states = np.empty((int(finite.max()) + 1, problem.n))
    v = problem.phi.copy()
    states[0] = problem.full_state(v)
    for t in range(1, states.shape[0]):
        v = problem.iteration_matrix @ v + problem.forcing
        states[t] = problem.full_state(v)
    germ = np.zeros(problem.n)
    ok = kick != UNREACHABLE
    germ[ok] = states[kick[ok], np.flatnonzero(ok)]
    return germ


# ------------------------------------------------------------ influence matrix


@dataclass(frozen=True)
class InfluenceMatrixU:
    """Unit boundary responses: ``U[a, b]`` is interior node ``interior[a]``'s
    steady opinion when boundary node ``boundary[b]`` holds 1 and everything
    else starts (or stays) at 0."""

    U: np.ndarray
    interior: np.ndarray
    boundary: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.U.sum(axis=1)

    @property
    def column_sums(self) -> np.ndarray:
        return self.U.sum(axis=0)


def influence_matrix(system: InfluenceSystem, s) -> InfluenceMatrixU:
    """``U = G S W_ib`` with one factorisation and ``|boundary|`` column solves."""
    problem = make_problem(system, s)
    require_well_posed(problem)
    if problem.interior.size == 0:
        u = np.zeros((0, problem.boundary.size))
    else:
        u = problem.solve(problem.s_int[:, None] * problem.W_ib)
    return InfluenceMatrixU(u, problem.interior, problem.boundary)


def boundary_decomposition(problem: DirichletProblem):
    """Per-boundary-node responses ``beta_j`` (columns) and the interior term ``G (I - S) phi``.

    ``v* = sum_j beta_j psi_j + G (I - S) phi``.
    """
    require_well_posed(problem)
    betas = problem.solve(problem.s_int[:, None] * problem.W_ib)
    interior_term = problem.solve((1.0 - problem.s_int) * problem.phi)
    return betas, interior_term


# ---------------------------------------------------------- all-vertex scans


@dataclass(frozen=True)
class ScanMatrices:
    """Row ``i`` describes the problem where node ``i`` alone broadcasts a unit opinion.

    Rows of ill-posed source problems have ``well_posed[i] = False`` and hold
    NaN in ``U_inf`` and ``E`` and ``UNREACHABLE`` in ``T`` and ``S_eps``.
    """

    U_inf: np.ndarray
    T: np.ndarray | None
    E: np.ndarray | None
    S_eps: np.ndarray | None
    well_posed: np.ndarray
    epsilon: float
    s: np.ndarray

    @property
    def n(self) -> int:
        return self.U_inf.shape[0]

    @property
    def stabilization_capped(self) -> int:
        if self.S_eps is None:
            return 0
        return int(np.sum(self.S_eps[self.well_posed] == UNREACHABLE))


def source_susceptibility(s, i: int) -> np.ndarray:
    s_i = np.array(s, dtype=float)
    s_i[i] = 0.0
    return s_i


def _source_row(system: InfluenceSystem, s: np.ndarray, i: int):
    """Steady responses to a unit broadcast from ``i``; ``None`` when ill-posed."""
    n = system.n
    interior = np.flatnonzero(s > 0)
    interior = interior[interior != i]
    row = np.zeros(n)
    row[i] = 1.0
    if interior.size == 0:
        return row
    s_int = s[interior]
    w = system.weights
    a = s_int[:, None] * w[np.ix_(interior, interior)]
    if np.max(a.sum(axis=1)) >= 1.0 - RHO_MARGIN:
        # Row-sum bound is inconclusive; fall back to the exact gates.
        problem = make_problem(system, source_susceptibility(s, i), psi={i: 1.0})
        if closed_undamped_classes(problem):
            return None
        rho = float(np.max(np.abs(np.linalg.eigvals(a))))
        if rho >= 1.0 - RHO_MARGIN:
            return None
    row[interior] = np.linalg.solve(np.eye(interior.size) - a, s_int * w[interior, i])
    return row


def scan_responses(system: InfluenceSystem, s) -> tuple[np.ndarray, np.ndarray]:
    """Steady-response matrix ``U_inf`` and the per-row well-posedness flags."""
    s = validate_susceptibility(s, system.n)
    n = system.n
    u = np.full((n, n), np.nan)
    ok = np.zeros(n, dtype=bool)
    for i in range(n):
        row = _source_row(system, s, i)
        if row is not None:
            u[i] = row
            ok[i] = True
    return u, ok


def scan_kickoff(system: InfluenceSystem, s) -> np.ndarray:
    """Structural kick-off matrix: hop distance from ``i`` along influence, through susceptible nodes."""
    s = np.asarray(s, dtype=float)
    lists = _propagation_lists(system)
    allowed = s > 0
    return np.vstack([bfs_hops(lists, i, allowed=allowed) for i in range(system.n)])


def scan_all_vertices(
    system: InfluenceSystem,
    s,
    epsilon: float = DEFAULT_EPSILON,
    t_cap: int = DEFAULT_T_CAP,
    responses_only: bool = False,
) -> ScanMatrices:
    """Fill ``U_inf``, ``T``, ``E`` and ``S_eps`` by making each node the unit source in turn.

    All source problems are simulated together: row ``i`` of the state
    matrix evolves as ``s[i] * (W v) + (1 - s[i]) * phi[i]``.
    """
    if system.n < 2:
        raise ValueError("scanning needs at least two nodes")
    s = validate_susceptibility(s, system.n)
    u, ok = scan_responses(system, s)
    if responses_only:
        return ScanMatrices(u, None, None, None, ok, float(epsilon), s)

    n = system.n
    kick = scan_kickoff(system, s)
    smat = np.tile(s, (n, 1))
    np.fill_diagonal(smat, 0.0)
    fixed = np.eye(n)  # (1 - s[i]) * phi[i] is nonzero only at the source
    wt = system.weights.T
    v = np.eye(n)
    germ = np.zeros((n, n))
    stab = np.full((n, n), UNREACHABLE, dtype=np.int64)
    target = np.where(ok[:, None], u, np.inf)
    finite_kick = kick[ok & np.any(kick != UNREACHABLE, axis=1)]
    horizon = int(finite_kick[finite_kick != UNREACHABLE].max()) if finite_kick.size else 0
    t = 0
    while True:
        at_kick = kick == t
        germ[at_kick] = v[at_kick]
        newly = (stab == UNREACHABLE) & (np.abs(v - target) < epsilon)
        stab[newly] = t
        pending = np.any(stab[ok] == UNREACHABLE)
        if (t >= horizon and not pending) or t >= t_cap:
            break
        v = smat * (v @ wt) + fixed
        t += 1
    germ[~ok] = np.nan
    kick[~ok] = UNREACHABLE
    stab[~ok] = UNREACHABLE
    return ScanMatrices(u, kick, germ, stab, ok, float(epsilon), s)


def volumes(scan: ScanMatrices):
    """Broadcast (out) and reception (in) volumes and their common total.

    Ill-posed rows are left out of every sum.
    """
    u = np.where(scan.well_posed[:, None], scan.U_inf, 0.0)
    off = u.copy()
    np.fill_diagonal(off, 0.0)
    out_vol = off.sum(axis=1)
    in_vol = off.sum(axis=0)
    return out_vol, in_vol, float(off.sum())
