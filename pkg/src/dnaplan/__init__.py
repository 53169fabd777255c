"""dnaplan: globally optimal diffusion sampling schedules from difficulty profiles."""

__version__ = "0.1.0"

from .diagnostics import (
    ClassifierConfig,
    GainSeries,
    StabilityReport,
    classify,
    stepwise_gain,
)
from .linearflow import (
    RolloutReport,
    SimScenario,
    extract_dna,
    ideal_state,
    make_scenario,
    model_velocity,
    propagate,
    rollout,
    verify_lever_identity,
)
from .oracle import OracleResult, enumerate_best, recompute_cost
from .planner import (
    AdaptivePlanResult,
    InfeasiblePlanError,
    PlannerGraph,
    Schedule,
    build_graph,
    path_cost,
    plan_adaptive,
    plan_fixed,
    plan_unconstrained,
    restrict_nodes,
)
from .profile import (
    DnaProfile,
    ProfileValidationError,
    TimeGrid,
    load_profile,
    resample,
    save_profile,
    temporal_lever,
    transition_cost,
    uniform_grid,
)
from .regressor import (
    RegressorParams,
    TrainConfig,
    backward,
    benchmark,
    cosine_loss,
    forward,
    train,
)

__all__ = [
    "__version__",
    "AdaptivePlanResult",
    "ClassifierConfig",
    "DnaProfile",
    "GainSeries",
    "InfeasiblePlanError",
    "OracleResult",
    "PlannerGraph",
    "ProfileValidationError",
    "RegressorParams",
    "RolloutReport",
    "Schedule",
    "SimScenario",
    "StabilityReport",
    "TimeGrid",
    "TrainConfig",
    "backward",
    "benchmark",
    "build_graph",
    "classify",
    "cosine_loss",
    "enumerate_best",
    "extract_dna",
    "forward",
    "ideal_state",
    "load_profile",
    "make_scenario",
    "model_velocity",
    "path_cost",
    "plan_adaptive",
    "plan_fixed",
    "plan_unconstrained",
    "propagate",
    "recompute_cost",
    "resample",
    "restrict_nodes",
    "rollout",
    "save_profile",
    "stepwise_gain",
    "temporal_lever",
    "train",
    "transition_cost",
    "uniform_grid",
    "verify_lever_identity",
]
