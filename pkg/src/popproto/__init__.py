"""Simulation of self-stabilizing two-hop coloring and loosely-stabilizing
leader election in population protocols on arbitrary graphs."""

from .coloring import (
    DetTwoHopState,
    KnowledgeParams,
    NCState,
    TwoHopState,
    check_normal,
    check_two_hop,
    dlru_interact,
    dlru_protocol,
    lru_interact,
    lru_protocol,
    nc_interact,
    nc_protocol,
)
from .election import BCParams, LeaderState, bc_interact, bc_protocol, compute_params
from .engine import Configuration, ProtocolSpec, Trace, adversarial_config, run_until, step
from .graph import Graph, GraphError, GraphStats, build_graph, gen_family, stats
from .harness import measure_convergence, measure_holding, sweep

__version__ = "0.1.0"
