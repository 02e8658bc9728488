"""Friedkin-Johnsen opinion dynamics as a discrete Dirichlet boundary-value problem."""

__version__ = "0.1.0"

from .broadcasting import (
    BroadcastingGraph,
    CentralityVector,
    broadcasting_centralities,
    broadcasting_graph,
    centralization,
    classical_centralities,
)
from .dynamics import DirichletProblem, diagnose, make_problem, require_well_posed, steady_state
from .errors import FJError, NotWellPosed
from .graph import InfluenceSystem, build_system, karate_club, load_dataset, random_walk_system
from .influence import influence_matrix, node_diagnostics, scan_all_vertices
from .montecarlo import CampaignConfig, run_campaign

__all__ = [
    "BroadcastingGraph",
    "CampaignConfig",
    "CentralityVector",
    "DirichletProblem",
    "FJError",
    "InfluenceSystem",
    "NotWellPosed",
    "broadcasting_centralities",
    "broadcasting_graph",
    "build_system",
    "centralization",
    "classical_centralities",
    "diagnose",
    "influence_matrix",
    "karate_club",
    "load_dataset",
    "make_problem",
    "node_diagnostics",
    "random_walk_system",
    "require_well_posed",
    "run_campaign",
    "scan_all_vertices",
    "steady_state",
]
