"""scnplan: static planning for spatial channel networks.

Plan routing, lane, and spectrum assignments for networks whose nodes
spatially bypass whole lanes and only partially support wavelength
switching. The package provides a three-phase first-fit planner, a
simulated-annealing sequence search, an exact-model emitter with a
solution validator and lower bounds, an exhaustive oracle for tiny
instances, and an experiment harness.
"""

from .allocation import AllocationState, Channel, SChRecord, Solution
from .errors import ScnPlanError
from .harness import (
    ExperimentPlan,
    TrafficProfile,
    generate_traffic,
    mean_ci,
    run_experiment,
)
from .heuristic import HeuristicConfig, PlanContext, plan
from .ilp import (
    ModelPhase,
    emit_full_model,
    emit_relaxed_model,
    validate_solution,
    weak_lower_bound,
)
from .instance import Instance, Request, dump_requests, load_requests
from .oracle import OracleLimits, exact_solve
from .physical import (
    GridParams,
    ModulationTable,
    Physics,
    default_physics,
    load_physics,
    simplified_physics,
)
from .siman import AnnealConfig, Energy, optimize_sequence
from .topology import (
    CandidatePath,
    LaneProfile,
    Network,
    bundled_topology,
    k_shortest_paths,
    lane_profile,
    load_topology,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationState",
    "AnnealConfig",
    "CandidatePath",
    "Channel",
    "Energy",
    "ExperimentPlan",
    "GridParams",
    "HeuristicConfig",
    "Instance",
    "LaneProfile",
    "ModelPhase",
    "ModulationTable",
    "Network",
    "OracleLimits",
    "Physics",
    "PlanContext",
    "Request",
    "SChRecord",
    "ScnPlanError",
    "Solution",
    "TrafficProfile",
    "bundled_topology",
    "default_physics",
    "dump_requests",
    "emit_full_model",
    "emit_relaxed_model",
    "exact_solve",
    "generate_traffic",
    "k_shortest_paths",
    "lane_profile",
    "load_physics",
    "load_requests",
    "load_topology",
    "mean_ci",
    "optimize_sequence",
    "plan",
    "run_experiment",
    "simplified_physics",
    "validate_solution",
    "weak_lower_bound",
]
