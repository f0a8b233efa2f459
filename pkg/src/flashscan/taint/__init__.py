"""Inter-procedural taint analysis over the contract IR."""

from .engine import (
    TaintContext, TaintResult, analyze_taint, fixpoint, propagate,
    reconstruct_paths, taint_debug_json,
)
from .flows import Flow, build_flows
from .model import SINK_KINDS, SOURCE_KINDS, TaintLabel, TaintMap, TaintPath, carrier_id
from .replay import ReplayError, replay
from .sinks import SinkContext, is_sink
from .sources import identify_sources

__all__ = [
    "Flow", "ReplayError", "SINK_KINDS", "SOURCE_KINDS", "SinkContext", "TaintContext",
    "TaintLabel", "TaintMap", "TaintPath", "TaintResult", "analyze_taint", "build_flows",
    "carrier_id", "fixpoint", "identify_sources", "is_sink", "propagate", "reconstruct_paths",
    "replay", "taint_debug_json",
]
