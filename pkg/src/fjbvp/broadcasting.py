"""Broadcasting graph and the opinion-broadcasting centralities built on it.

The broadcasting graph keeps the support edges ``(i, j)`` of ``W`` and
weights them with the steady response ``U_inf[i, j]``.  Path lengths use the
log metric ``-log w``, so a shortest path is a most reliable (max-product)
chain of influence.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import PowerIterationDiverged
from .graph import UNREACHABLE, InfluenceSystem, closeness_from_distances, hop_distances
from .influence import ScanMatrices

MEASURES = ("obdeg", "obclose", "obbet", "obeig", "obpr")
CLASSICAL = ("degree", "closeness", "betweenness", "eigenvector", "pagerank")
TIE_RTOL = 1e-9
DEFAULT_ETA = 1e-8
DEFAULT_ALPHA = 0.85
EIG_TOL = 1e-12
PR_TOL = 1e-14
MAX_ITER = 100_000


@dataclass(frozen=True)
class CentralityVector:
    kind: str
    values: np.ndarray
    params: dict = field(default_factory=dict)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class BroadcastingGraph:
    weights: np.ndarray  # w_inf, zero off the support and on the diagonal
    response: np.ndarray  # the full U_inf
    support: np.ndarray  # boolean, no self-loops

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @cached_property
    def log_lengths(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.weights > 0, -np.log(self.weights), np.inf)

    @cached_property
    def hop_distances(self) -> np.ndarray:
        return hop_distances(self.support)

    def reversed(self) -> "BroadcastingGraph":
        return BroadcastingGraph(self.weights.T.copy(), self.response.T.copy(), self.support.T.copy())


def broadcasting_graph(system: InfluenceSystem, scan: ScanMatrices) -> BroadcastingGraph:
    """Restrict ``U_inf`` to the support edges of ``W`` (ill-posed scan rows become zero)."""
    support = system.support.copy()
    np.fill_diagonal(support, False)
    response = np.where(scan.well_posed[:, None], scan.U_inf, 0.0)
    weights = np.where(support, response, 0.0)
    return BroadcastingGraph(weights, response, support)


# ----------------------------------------------------------- shortest paths


def _adjacency(lengths: np.ndarray):
    n = lengths.shape[0]
    adj = []
    for i in range(n):
        js = np.flatnonzero(np.isfinite(lengths[i]))
        js = js[js != i]
        adj.append([(int(j), float(lengths[i, j])) for j in js])
    return adj


def _tied(a: float, b: float) -> bool:
    return abs(a - b) <= TIE_RTOL * (1.0 + abs(b))


def _sssp(adj, source: int):
    """Dijkstra with geodesic counting; returns (dist, sigma, preds, settle order)."""
    n = len(adj)
    dist = np.full(n, np.inf)
    sigma = np.zeros(n)
    preds: list[list[int]] = [[] for _ in range(n)]
    settled = np.zeros(n, dtype=bool)
    order = []
    dist[source] = 0.0
    sigma[source] = 1.0
    heap = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if settled[v]:
            continue
        settled[v] = True
        order.append(v)
        for w, length in adj[v]:
            if settled[w]:
                continue
            alt = d + length
            if dist[w] == np.inf or (alt < dist[w] and not _tied(alt, dist[w])):
                dist[w] = alt
                sigma[w] = sigma[v]
                preds[w] = [v]
                heapq.heappush(heap, (alt, w))
            elif _tied(alt, dist[w]):
                sigma[w] += sigma[v]
                preds[w].append(v)
    return dist, sigma, preds, order


def shortest_path_lengths(lengths: np.ndarray) -> np.ndarray:
    adj = _adjacency(lengths)
    return np.vstack([_sssp(adj, i)[0] for i in range(len(adj))])


def log_distances(bg: BroadcastingGraph) -> np.ndarray:
    """Log-metric distances; ``exp(-d)`` is the best path product of broadcast weights."""
    return shortest_path_lengths(bg.log_lengths)


def betweenness(lengths: np.ndarray) -> np.ndarray:
    """Directed betweenness over ordered pairs, normalised by ``(n-1)(n-2)``."""
    n = lengths.shape[0]
    adj = _adjacency(lengths)
    c = np.zeros(n)
    for s in range(n):
        _, sigma, preds, order = _sssp(adj, s)
        delta = np.zeros(n)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                c[w] += delta[w]
    return c / ((n - 1) * (n - 2)) if n >= 3 else np.zeros(n)


# ---------------------------------------------------------- spectral scores


def perron_vector(weights: np.ndarray, eta: float = DEFAULT_ETA) -> np.ndarray:
    """Normalised Perron vector of ``weights + eta * 11^T`` by power iteration.

    The iteration runs on ``M + c I`` with ``c`` the largest row sum of ``M``.
    The shift keeps the eigenvectors and separates the Perron root from
    eigenvalues of equal modulus (periodic graphs), which would stall it.
    """
    n = weights.shape[0]
    shift = float(weights.sum(axis=1).max()) + eta * n
    x = np.full(n, 1.0 / n)
    for _ in range(MAX_ITER):
        y = weights @ x + eta * x.sum() + shift * x
        total = y.sum()
        if total <= 0:
            raise PowerIterationDiverged("iterate vanished; use eta > 0 for reducible weights")
        y /= total
        if np.abs(y - x).sum() <= EIG_TOL:
            return y
        x = y
    raise PowerIterationDiverged(f"no convergence to {EIG_TOL} within {MAX_ITER} iterations")


def pagerank(weights: np.ndarray, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """PageRank of the row-normalised weights; empty rows jump uniformly."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    n = weights.shape[0]
    rows = weights.sum(axis=1)
    p = np.where(rows[:, None] > 0, weights / np.where(rows > 0, rows, 1.0)[:, None], 1.0 / n)
    pi = np.full(n, 1.0 / n)
    for _ in range(MAX_ITER):
        new = alpha * (pi @ p) + (1.0 - alpha) / n
        new /= new.sum()
        if np.abs(new - pi).sum() <= PR_TOL:
            return new
        pi = new
    raise PowerIterationDiverged(f"PageRank did not reach {PR_TOL} within {MAX_ITER} iterations")


# -------------------------------------------------------------- centralities


def obdeg(bg: BroadcastingGraph, scan: ScanMatrices | None = None) -> CentralityVector:
    n = bg.n
    return CentralityVector("obdeg", bg.weights.sum(axis=1) / (n - 1))


def broadcast_floor(bg: BroadcastingGraph, distances=None) -> float:
    """Smallest response over ordered pairs joined by a directed path (0 if none)."""
    d = bg.hop_distances if distances is None else distances
    mask = d != UNREACHABLE
    np.fill_diagonal(mask, False)
    return float(bg.response[mask].min()) if mask.any() else 0.0


def obclose(bg: BroadcastingGraph, scan: ScanMatrices | None = None, distances=None) -> CentralityVector:
    d = bg.hop_distances if distances is None else distances
    nu = broadcast_floor(bg, d)
    n = bg.n
    values = np.zeros(n)
    if nu > 0:
        for i in range(n):
            reach = d[i] != UNREACHABLE
            reach[i] = False
            k = int(reach.sum())
            if k:
                values[i] = k * nu / float(np.sum(bg.response[i, reach] * d[i, reach]))
    return CentralityVector("obclose", values, {"nu": nu})


def obclose_log(bg: BroadcastingGraph, log_d=None) -> CentralityVector:
    """Closeness in the log metric: ``|R(i)| / sum_j d_log(i, j)`` over log-reachable ``j``.

    Targets behind zero-weight edges are unreachable.  A zero total length
    (every target captured with certainty) gives ``inf``.
    """
    d = log_distances(bg) if log_d is None else log_d
    n = bg.n
    values = np.zeros(n)
    for i in range(n):
        reach = np.isfinite(d[i])
        reach[i] = False
        k = int(reach.sum())
        if k:
            total = float(d[i, reach].sum())
            values[i] = k / total if total > 0 else np.inf
    return CentralityVector("obclose", values, {"metric": "log"})


def obbet(bg: BroadcastingGraph) -> CentralityVector:
    return CentralityVector("obbet", betweenness(bg.log_lengths), {"tie_rtol": TIE_RTOL})


def obeig(bg: BroadcastingGraph, eta: float = DEFAULT_ETA) -> CentralityVector:
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    return CentralityVector("obeig", perron_vector(bg.weights, eta), {"eta": eta})


def obpr(bg: BroadcastingGraph, alpha: float = DEFAULT_ALPHA) -> CentralityVector:
    return CentralityVector("obpr", pagerank(bg.weights, alpha), {"alpha": alpha})


CLOSENESS_METRICS = ("log", "definition")


def broadcasting_centralities(
    bg: BroadcastingGraph, eta: float = DEFAULT_ETA, alpha: float = DEFAULT_ALPHA, closeness: str = "definition"
) -> dict:
    """All five measures.  ``closeness="log"`` swaps in :func:`obclose_log`."""
    if closeness not in CLOSENESS_METRICS:
        raise ValueError(f"closeness must be one of {CLOSENESS_METRICS}")
    return {
        "obdeg": obdeg(bg),
        "obclose": obclose(bg) if closeness == "definition" else obclose_log(bg),
        "obbet": obbet(bg),
        "obeig": obeig(bg, eta),
        "obpr": obpr(bg, alpha),
    }


def reception_analogues(
    bg: BroadcastingGraph, eta: float = DEFAULT_ETA, alpha: float = DEFAULT_ALPHA, closeness: str = "definition"
) -> dict:
    """The five measures on the reversed broadcasting graph."""
    rev = broadcasting_centralities(bg.reversed(), eta, alpha, closeness)
    return {k: CentralityVector(k + "_in", v.values, v.params) for k, v in rev.items()}


def centralization(values) -> float:
    """``sum_i (max c - c_i)``."""
    v = np.asarray(values, dtype=float)
    return float(np.sum(v.max() - v)) if v.size else 0.0


def classical_centralities(system: InfluenceSystem, eta: float = DEFAULT_ETA, alpha: float = DEFAULT_ALPHA) -> dict:
    """Topology-only counterparts on the 0/1 support (hop lengths, unit weights)."""
    n = system.n
    adj = system.support.astype(float)
    np.fill_diagonal(adj, 0.0)
    d = hop_distances(adj > 0)
    unit = np.where(adj > 0, 1.0, np.inf)
    return {
        "degree": CentralityVector("degree", adj.sum(axis=1) / (n - 1)),
        "closeness": CentralityVector("closeness", closeness_from_distances(d)),
        "betweenness": CentralityVector("betweenness", betweenness(unit)),
        "eigenvector": CentralityVector("eigenvector", perron_vector(adj, eta), {"eta": eta}),
        "pagerank": CentralityVector("pagerank", pagerank(adj, alpha), {"alpha": alpha}),
    }
