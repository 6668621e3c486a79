"""Exact Euclidean Steiner minimal trees in any dimension by branch-and-bound.

Two enumeration schemes are provided: the classic depth-first scheme with an
equilateral-point lower bound, and a variant that jumps to reorganized
topologies whenever two adjacent Steiner points collide.
"""
from .bounds import lower_bound
from .engine import (
    BnbNode,
    NodeState,
    SearchStats,
    Solution,
    SolveOptions,
    enumerate_all,
    solve_enhanced,
    solve_original,
    twin_prune,
)
from .errors import SteinerError
from .geometry import equilateral_point, fermat_point
from .instances import Instance, builtin, builtin_instances, format_instance, parse_instance
from .optimizer import OptimizeOptions, OptimizeOutcome, OutcomeKind, optimize
from .topology import TopologyTree, build_tree, count_full_topologies, reorganizations

__all__ = [
    "BnbNode", "Instance", "NodeState", "OptimizeOptions", "OptimizeOutcome", "OutcomeKind",
    "SearchStats", "Solution", "SolveOptions", "SteinerError", "TopologyTree", "build_tree",
    "builtin", "builtin_instances", "count_full_topologies", "enumerate_all",
    "equilateral_point", "fermat_point", "format_instance", "lower_bound", "optimize",
    "parse_instance", "reorganizations", "solve_enhanced", "solve_original", "twin_prune",
]
