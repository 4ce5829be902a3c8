"""Worst-case impact of stealthy attacks on networked systems, and where to put monitors."""

from .allocation import (
    AllocationContext,
    AllocationResult,
    GapReport,
    Strategy,
    allocate,
    allocate_by_centrality,
    allocate_combined,
    allocate_optimal,
    gap_report,
    worst_attack_for,
)
from .centrality import CentralityKind, centrality, top_monitor_sets
from .graph import Graph, generate_erdos_renyi, laplacian, load_graph, save_graph
from .model import SwingParams, build_consensus_model, build_swing_model, load_ieee14, simulate
from .wcai import ScenarioParams, WcaiResult, solve_wcai, validate_bound

__version__ = "0.1.0"
