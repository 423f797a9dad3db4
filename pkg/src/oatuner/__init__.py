"""Preference tuning for robot-to-human handovers.

Comparative A/B search over handover parameters (speed, position,
grip force release), a kinematic handover simulator, fluency
analytics, a blinded evaluation game, synthetic users for exhaustive
verification, and a session service that ties the protocol together.
"""

from .engine import (
    Converged,
    ConvergedVia,
    NextPair,
    OATuner,
    SessionPlan,
    StopCriteria,
    advance_plan,
    comparison_cap,
    init_tuner,
    replay,
)
from .evaluation import EvaluationTrial, make_trials, score
from .fluency import FluencyReport, compare_phases, compute_fluency, success_rate
from .session import (
    Session,
    SessionConfig,
    SessionStore,
    create_session,
    replay_session,
    run_scripted_session,
)
from .sim import (
    FailureConfig,
    HandoverRecord,
    HumanModel,
    SimConfig,
    execute_handover,
    reach_duration,
)
from .users import IdealPointUser, simulate_cohort
from .values import (
    HandoverParams,
    ParameterSpec,
    ParameterValue,
    default_specs,
    midpoint,
    near_average_defaults,
)

__version__ = "0.1.0"

__all__ = [
    "Converged",
    "ConvergedVia",
    "EvaluationTrial",
    "FailureConfig",
    "FluencyReport",
    "HandoverParams",
    "HandoverRecord",
    "HumanModel",
    "IdealPointUser",
    "NextPair",
    "OATuner",
    "ParameterSpec",
    "ParameterValue",
    "Session",
    "SessionConfig",
    "SessionPlan",
    "SessionStore",
    "SimConfig",
    "StopCriteria",
    "advance_plan",
    "compare_phases",
    "comparison_cap",
    "compute_fluency",
    "create_session",
    "default_specs",
    "execute_handover",
    "init_tuner",
    "make_trials",
    "midpoint",
    "near_average_defaults",
    "reach_duration",
    "replay",
    "replay_session",
    "run_scripted_session",
    "score",
    "simulate_cohort",
    "success_rate",
]
