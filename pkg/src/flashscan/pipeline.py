"""End-to-end analysis of one contract: IR, taint, grouping, two prompting stages, checker."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .checker import CheckerOutcome, apply_checker
from .config import AnalysisConfig
from .errors import FlashscanError
from .frontend import parse_source
from .grouping import GroupSummary, PathGroup, group_paths, groups_debug_json, summarize_group
from .ir import ContractIR, build_icfg, export_ir_json, import_ir_json, lower_unit
from .ir.cfg import ICFG
from .reasoning import (
    EngineConfig, FilterVerdict, SimulationVerdict, StageLog, render_filter_prompt,
    render_simulation_prompt, run_stage,
)
from .reasoning.engine import Backend
from .taint import TaintResult, analyze_taint, taint_debug_json


@dataclass
class ContractAnalysis:
    ir: ContractIR
    icfg: ICFG
    taint: TaintResult
    groups: list[PathGroup]
    summaries: list[GroupSummary]
    filter_verdicts: list[FilterVerdict]
    simulated: list[int]  # indices into groups that reached the simulation stage
    simulation_verdicts: list[SimulationVerdict]
    checker: list[CheckerOutcome]  # aligned with ``simulated``
    log: StageLog = field(default_factory=StageLog)
    token_estimates: dict[str, list[int]] = field(default_factory=dict)

    def simulation_for(self, gi: int) -> Optional[SimulationVerdict]:
        return self.simulation_verdicts[self.simulated.index(gi)] if gi in self.simulated else None

    def checker_for(self, gi: int) -> Optional[CheckerOutcome]:
        return self.checker[self.simulated.index(gi)] if gi in self.simulated else None


def analyze_ir(ir: ContractIR, config: AnalysisConfig, engine: EngineConfig,
               backend: Optional[Backend] = None) -> ContractAnalysis:
    icfg = build_icfg(ir)
    taint = analyze_taint(ir, icfg, config)
    groups = group_paths(taint.paths)
    summaries = [summarize_group(g, ir, config) for g in groups]
    log = StageLog()

    filter_prompts = [render_filter_prompt(s, k) for k, s in enumerate(summaries, 1)]
    filters = run_stage(filter_prompts, engine, backend, log, config)

    # only groups the filtering stage kept are ever rendered for simulation
    simulated = [i for i, v in enumerate(filters) if v.keep]
    sim_prompts = [render_simulation_prompt(summaries[i], filters[i]) for i in simulated]
    sims = run_stage(sim_prompts, engine, backend, log, config)

    vulnerable = [i for i, v in zip(simulated, sims) if v.vulnerable]
    outcomes_v = apply_checker(ir, [groups[i] for i in vulnerable], config)
    by_group = dict(zip(vulnerable, outcomes_v))
    outcomes = [by_group.get(i) or CheckerOutcome(groups[i].key.render(), False, []) for i in simulated]
    return ContractAnalysis(
        ir, icfg, taint, groups, summaries, filters, simulated, sims, outcomes, log,
        {"filter": [p.token_estimate for p in filter_prompts],
         "simulation": [p.token_estimate for p in sim_prompts]},
    )


def load_contracts(path: Path) -> tuple[list[ContractIR], list[dict]]:
    """Contracts from a Solidity file or an IR interchange document, plus parse diagnostics."""
    if not path.is_file():
        raise FlashscanError("file-not-found", f"no such file: {path}", str(path))
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        docs = doc if isinstance(doc, list) else [doc]
        return [import_ir_json(d) for d in docs], []
    text = path.read_bytes()
    unit = parse_source(text, str(path))
    source = text.decode("utf-8", errors="replace")
    contracts = lower_unit(unit, source)
    diags = [d.to_json() for d in unit.diagnostics]
    for ir in contracts:
        diags += [d.to_json() if hasattr(d, "to_json") else dict(d) for d in ir.diagnostics]
    return contracts, diags


def stage_documents(a: ContractAnalysis) -> dict[str, dict]:
    """Per-stage debug documents, named by file."""
    filter_log = [e for e in a.log.entries if e["stage"] == "PathFiltering"]
    sim_log = [e for e in a.log.entries if e["stage"] == "AttackSimulation"]
    return {
        "ir.json": export_ir_json(a.ir),
        "taint.json": taint_debug_json(a.taint),
        "groups.json": groups_debug_json(a.groups, a.summaries),
        "filter.json": {"verdicts": [v.to_json() for v in a.filter_verdicts], "transcripts": filter_log},
        "simulation.json": {"groups": [a.groups[i].key.render() for i in a.simulated],
                            "verdicts": [v.to_json() for v in a.simulation_verdicts], "transcripts": sim_log},
        "checker.json": {"outcomes": [o.to_json() for o in a.checker]},
    }
