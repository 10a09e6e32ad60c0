"""Matchings in k-partite k-uniform hypergraphs under partite codegree conditions."""

from .constructions import complete, edgeless, parity_family, perturb, random_instance, space_barrier
from .core import Bipartition, Hypergraph, Matching, Params, RefinedPartition, Vertex, codegrees
from .errors import KPMatchError, StageFailed
from .extremal import check_d_extremal, check_s_extremal, main_matching
from .io import parse_instance, render_instance
from .rng import SplitMix64, derive_seed
from .solvers import greedy_fact_matching, has_perfect_matching, matching_number, max_matching

__all__ = [
    "Bipartition", "Hypergraph", "KPMatchError", "Matching", "Params", "RefinedPartition",
    "SplitMix64", "StageFailed", "Vertex", "check_d_extremal", "check_s_extremal", "codegrees",
    "complete", "derive_seed", "edgeless", "greedy_fact_matching", "has_perfect_matching",
    "main_matching", "matching_number", "max_matching", "parity_family", "parse_instance",
    "perturb", "random_instance", "render_instance", "space_barrier",
]

__version__ = "0.1.0"
