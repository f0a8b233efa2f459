"""Rule-based post-filter that suppresses flagged groups protected by a known defense."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .config import AnalysisConfig
from .grouping import PathGroup
from .ir.model import ContractIR, FunctionIR
from .patterns import effects_before_router_calls, privilege_matches, temporal_matches
from .taint.model import TaintPath

DEFENSE_KINDS = ("Privilege", "Temporal", "FeeOnTransfer")


@dataclass(frozen=True)
class DefenseFinding:
    kind: str
    location: str
    evidence: str
    protected_functions: frozenset[str] = frozenset()

    def to_json(self) -> dict:
        return {"kind": self.kind, "location": self.location, "evidence": self.evidence,
                "protectedFunctions": sorted(self.protected_functions)}


@dataclass
class CheckerOutcome:
    group_key: str
    suppressed: bool
    defenses: list[DefenseFinding] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"groupKey": self.group_key, "suppressed": self.suppressed,
                "defenses": [d.to_json() for d in self.defenses]}


def path_functions(ir: ContractIR, path: TaintPath) -> list[FunctionIR]:
    """Functions holding a step of ``path``, plus the sink function, in first-visit order."""
    out: list[FunctionIR] = []
    for s in path.steps:
        fn = ir.functions[s.func]
        if fn not in out:
            out.append(fn)
    sink = ir.function(path.sink_function)
    if sink is not None and sink not in out:
        out.append(sink)
    return out


def check_privilege(ir: ContractIR, path: TaintPath, config: Optional[AnalysisConfig] = None) -> list[DefenseFinding]:
    config = config or AnalysisConfig()
    return [DefenseFinding("Privilege", m.location, m.evidence, frozenset({m.function}))
            for fn in path_functions(ir, path) for m in privilege_matches(ir, fn, config)]


def check_temporal(ir: ContractIR, path: TaintPath) -> list[DefenseFinding]:
    return [DefenseFinding("Temporal", m.location, m.evidence, frozenset({m.function}))
            for fn in path_functions(ir, path) for m in temporal_matches(ir, fn)]


def _transfer_named(ir: ContractIR, path: TaintPath, config: AnalysisConfig) -> list[FunctionIR]:
    sink = ir.function(path.sink_function)
    if sink is None:
        return []
    if sink.name in config.transfer_functions:
        return [sink]
    out = []
    for inst in sink.instructions:
        if inst.kind == "InternalCall" and not inst.extra.get("unresolved") and inst.callee in config.transfer_functions:
            callee = ir.function(inst.callee)
            if callee is not None and callee not in out:
                out.append(callee)
    return out


def check_fee_on_transfer(ir: ContractIR, path: TaintPath, config: Optional[AnalysisConfig] = None) -> list[DefenseFinding]:
    config = config or AnalysisConfig()
    out = []
    for fn in _transfer_named(ir, path, config):
        evidence = effects_before_router_calls(ir, fn, config)
        if evidence:
            out.append(DefenseFinding("FeeOnTransfer", fn.name, evidence, frozenset({fn.name, path.sink_function})))
    return out


def check_path(ir: ContractIR, path: TaintPath, config: Optional[AnalysisConfig] = None) -> list[DefenseFinding]:
    config = config or AnalysisConfig()
    return check_privilege(ir, path, config) + check_temporal(ir, path) + check_fee_on_transfer(ir, path, config)


def apply_checker(ir: ContractIR, groups: Iterable[PathGroup], config: Optional[AnalysisConfig] = None) -> list[CheckerOutcome]:
    """One outcome per group, judged on its representative path."""
    config = config or AnalysisConfig()
    outcomes = []
    for g in groups:
        rep = g.representative
        defenses = check_path(ir, rep, config)
        on_path = {fn.name for fn in path_functions(ir, rep)}
        suppressed = any(d.protected_functions & on_path for d in defenses)
        outcomes.append(CheckerOutcome(g.key.render(), suppressed, defenses))
    return outcomes
