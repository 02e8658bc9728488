"""Influence systems: row-stochastic weight matrices, support graphs and hop distances.

Edge ``(i, j)`` of the support graph exists iff ``W[i, j] > 0``: agent ``i``
listens to agent ``j``.  Node ids are 0-based throughout.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AsymmetricAdjacency,
    IsolatedNode,
    NegativeWeight,
    ParseError,
    RowSumViolation,
)

ROW_SUM_TOL = 1e-12

#: Sentinel hop distance for "no directed path".  Compares larger than any
#: finite distance, so ordering logic needs no special cases.
UNREACHABLE = np.iinfo(np.int64).max


@dataclass(frozen=True)
class InfluenceSystem:
    """A validated row-stochastic influence matrix.

    ``adjacency`` is kept when the system was built as a random walk
    ``D^-1 A`` so the undirected spectral tools can recover ``D``.
    """

    weights: np.ndarray
    node_labels: tuple[str, ...] | None = None
    adjacency: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0

    def out_neighbors(self, i: int, loops: bool = False) -> np.ndarray:
        nbrs = np.flatnonzero(self.weights[i] > 0)
        return nbrs if loops else nbrs[nbrs != i]

    def out_degrees(self) -> np.ndarray:
        sup = self.support.copy()
        np.fill_diagonal(sup, False)
        return sup.sum(axis=1)

    def label(self, i: int) -> str:
        return self.node_labels[i] if self.node_labels else str(i)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def build_system(weights, node_labels=None, adjacency=None) -> InfluenceSystem:
    """Validate ``weights`` and wrap it as an :class:`InfluenceSystem`.

    Raises NegativeWeight or RowSumViolation (row index and deviation are
    attached to the exception).
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
        raise ValueError(f"weights must be a non-empty square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights contain non-finite entries")
    if np.any(w < 0):
        i, j = np.argwhere(w < 0)[0]
        raise NegativeWeight(f"W[{i},{j}] = {w[i, j]} is negative")
    dev = w.sum(axis=1) - 1.0
    bad = np.flatnonzero(np.abs(dev) > ROW_SUM_TOL)
    if bad.size:
        raise RowSumViolation(int(bad[0]), float(dev[bad[0]]))
    labels = tuple(str(x) for x in node_labels) if node_labels is not None else None
    if labels is not None and len(labels) != w.shape[0]:
        raise ValueError("node_labels length does not match matrix size")
    adj = _frozen(adjacency) if adjacency is not None else None
    return InfluenceSystem(_frozen(w), labels, adj)


def random_walk_system(adjacency, node_labels=None) -> InfluenceSystem:
    """Build ``W = D^-1 A`` from a symmetric nonnegative adjacency matrix."""
    a = np.asarray(adjacency, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("adjacency must be square")
    if np.any(a < 0):
        raise NegativeWeight("adjacency has negative entries")
    if not np.array_equal(a, a.T):
        raise AsymmetricAdjacency("adjacency matrix is not symmetric")
    deg = a.sum(axis=1)
    if np.any(deg == 0):
        raise IsolatedNode(f"node {int(np.flatnonzero(deg == 0)[0])} has degree 0")
    w = a / deg[:, None]
    # Exact renormalisation keeps row sums within 1e-12 even for large degrees.
    w = w / w.sum(axis=1, keepdims=True)
    return build_system(w, node_labels, adjacency=a)


def _out_lists(support: np.ndarray) -> list[np.ndarray]:
    n = support.shape[0]
    lists = []
    for i in range(n):
        nbrs = np.flatnonzero(support[i])
        lists.append(nbrs[nbrs != i])
    return lists


def bfs_hops(out_lists, source: int, allowed=None) -> np.ndarray:
    """Hop distances from ``source`` following ``out_lists``.

    ``allowed`` (boolean mask) restricts which nodes may be entered; the
    source itself is always allowed.
    """
    n = len(out_lists)
    dist = np.full(n, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in out_lists[u]:
            if dist[v] == UNREACHABLE and (allowed is None or allowed[v]):
                dist[v] = du
                queue.append(v)
    return dist


def hop_distances(support: np.ndarray) -> np.ndarray:
    """All-pairs BFS hop distances of a boolean support matrix."""
    lists = _out_lists(np.asarray(support, dtype=bool))
    return np.vstack([bfs_hops(lists, i) for i in range(len(lists))])


def directed_distances(system: InfluenceSystem) -> np.ndarray:
    """Hop distance matrix ``d[i, j]`` of the support graph (``UNREACHABLE`` if none)."""
    return hop_distances(system.support)


def out_reachability(system: InfluenceSystem, i: int, distances=None) -> np.ndarray:
    """Nodes ``j != i`` reachable from ``i``, ascending."""
    d = bfs_hops(_out_lists(system.support), i) if distances is None else distances[i]
    mask = d != UNREACHABLE
    mask[i] = False
    return np.flatnonzero(mask)


def _closeness_row(row: np.ndarray, i: int) -> float:
    reach = row != UNREACHABLE
    reach[i] = False
    k = int(reach.sum())
    return k / float(row[reach].sum()) if k else 0.0


def closeness_from_distances(d: np.ndarray) -> np.ndarray:
    """Out-closeness of every node from a hop distance matrix."""
    return np.array([_closeness_row(d[i], i) for i in range(d.shape[0])])


def out_closeness(system: InfluenceSystem, i: int, distances=None) -> float:
    """``|R+(i)| / sum_j d(i, j)`` over reachable ``j``; 0 if nothing is reachable."""
    row = bfs_hops(_out_lists(system.support), i) if distances is None else distances[i]
    return _closeness_row(row, i)


# ---------------------------------------------------------------- file formats


def read_edge_list(path, n: int | None = None) -> np.ndarray:
    """Parse ``i j [w]`` lines (0-based, ``#`` comments) into a raw weight matrix."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"{path}:{lineno}: expected 'i j [w]', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        if i < 0 or j < 0:
            raise ParseError(f"{path}:{lineno}: negative node id")
        rows.append((i, j, w))
    size = max([max(i, j) + 1 for i, j, _ in rows] + [n or 0])
    mat = np.zeros((size, size))
    for i, j, w in rows:
        mat[i, j] += w
    return mat


def read_dense_csv(path) -> np.ndarray:
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return mat


def row_normalize(raw) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    sums = raw.sum(axis=1)
    if np.any(sums <= 0):
        raise IsolatedNode(f"node {int(np.flatnonzero(sums <= 0)[0])} has no out-edges")
    return raw / sums[:, None]


def system_from_edges(raw, undirected: bool = False) -> InfluenceSystem:
    """Turn a raw weight matrix into a system: random walk if undirected, else row-normalised."""
    raw = np.asarray(raw, dtype=float)
    if undirected:
        return random_walk_system(np.maximum(raw, raw.T))
    w = row_normalize(raw)
    w = w / w.sum(axis=1, keepdims=True)
    return build_system(w)


# ------------------------------------------------------------------- datasets

#: Zachary karate club, 34 members, 78 friendships (0-based ids).
KARATE_EDGES = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7),
    (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9),
    (2, 13), (2, 27), (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10),
    (5, 6), (5, 10), (5, 16), (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33),
    (14, 32), (14, 33), (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32),
    (20, 33), (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33), (28, 31),
    (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
)

DATASETS = {"karate": "Zachary karate club (34 nodes, 78 undirected edges)"}


def karate_adjacency() -> np.ndarray:
    a = np.zeros((34, 34))
    for i, j in KARATE_EDGES:
        a[i, j] = a[j, i] = 1.0
    return a


def karate_club() -> InfluenceSystem:
    labels = [str(i + 1) for i in range(34)]
    return random_walk_system(karate_adjacency(), node_labels=labels)


def load_dataset(name: str) -> InfluenceSystem:
    if name == "karate":
        return karate_club()
    raise KeyError(f"unknown dataset {name!r}; available: {', '.join(DATASETS)}")
