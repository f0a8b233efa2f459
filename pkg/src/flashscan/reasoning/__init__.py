"""Two-stage prompting: path filtering, then attack simulation."""

from .engine import EngineConfig, OfflineBackend, RemoteBackend, StageLog, make_backend, run_stage
from .prompts import (
    FILTERING, PLACEHOLDERS, SIMULATION, PromptInstance, build_filter_request,
    estimate_tokens, render_filter_prompt, render_simulation_prompt, unexpanded_placeholders,
)
from .verdicts import FilterVerdict, SimulationVerdict, parse_filter_batch, parse_verdict

__all__ = [
    "EngineConfig", "FILTERING", "FilterVerdict", "OfflineBackend", "PLACEHOLDERS",
    "PromptInstance", "RemoteBackend", "SIMULATION", "SimulationVerdict", "StageLog",
    "build_filter_request", "estimate_tokens", "make_backend", "parse_filter_batch",
    "parse_verdict", "render_filter_prompt", "render_simulation_prompt", "run_stage",
    "unexpanded_placeholders",
]
