"""klever: knowledge-capital jump-process simulator and scenario toolkit."""

from .engine import (CANONICAL_LEVERS, K_STAR, EnsembleResult, PathRecord,
                     RunConfig, ScenarioSpec, run_ensemble, simulate_path)
from .metrics import TerminalStats, terminal_stats
from .model import (STATE_MAX, CapitalState, EffectiveParams, LeverGains,
                    LeverVector, ModelParams, Weights, composite_index,
                    effective_params, flow)

__all__ = [
    "CANONICAL_LEVERS", "K_STAR", "STATE_MAX",
    "CapitalState", "EffectiveParams", "EnsembleResult", "LeverGains",
    "LeverVector", "ModelParams", "PathRecord", "RunConfig", "ScenarioSpec",
    "TerminalStats", "Weights",
    "composite_index", "effective_params", "flow", "run_ensemble",
    "simulate_path", "terminal_stats",
]

__version__ = "0.1.0"
