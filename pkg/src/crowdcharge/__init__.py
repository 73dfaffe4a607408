"""Reliability-aware composition of crowdsourced wireless energy services.

A consumer asks for energy over a time window; nearby providers advertise
offers with a reliability score. Offers are cut into per-chunk partials,
composed one provider per chunk, and ranked by expected time extension
against aggregate reliability.
"""

from .assessment import assess, extension_pool, pool_rate
from .composer import (
    CompositionResult,
    NoFeasibleComposition,
    ParetoFront,
    SearchSpaceOverflow,
    compose_brute,
    compose_greedy,
    compose_heuristic,
    compose_knapsack,
    enumerate_all,
    pareto_front,
)
from .model import (
    CompositeService,
    EnergyQuery,
    EnergyService,
    ModelError,
    PartialService,
    PreferenceStrategy,
)
from .simulator import EnvironmentConfig, generate_environment, inject_failures
from .timeline import chunk_window, merge_chunks_by_max, select_nearby

__version__ = "0.1.0"

__all__ = [
    "CompositeService", "CompositionResult", "EnergyQuery", "EnergyService",
    "EnvironmentConfig", "ModelError", "NoFeasibleComposition", "ParetoFront",
    "PartialService", "PreferenceStrategy", "SearchSpaceOverflow", "assess",
    "chunk_window", "compose_brute", "compose_greedy", "compose_heuristic",
    "compose_knapsack", "enumerate_all", "extension_pool", "generate_environment",
    "inject_failures", "merge_chunks_by_max", "pareto_front", "pool_rate",
    "select_nearby",
]
