"""Sink classification: value transfers, ledger-update calls and economic state writes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..config import AnalysisConfig
from ..ir.cfg import ICFG
from ..ir.facts import Facts, extract_primitives
from ..ir.model import ContractIR, Instruction, SlotId, ValueRef
from .flows import normalize
from .model import TaintLabel, TaintMap


@dataclass
class SinkContext:
    ir: ContractIR
    icfg: ICFG
    facts: Facts
    config: AnalysisConfig
    ledger_functions: set[str] = field(default_factory=set)

    @classmethod
    def build(cls, ir: ContractIR, icfg: ICFG, config: Optional[AnalysisConfig] = None,
              facts: Optional[Facts] = None) -> "SinkContext":
        config = config or AnalysisConfig()
        facts = facts or extract_primitives(ir, config)
        return cls(ir, icfg, facts, config, facts.ledger_functions(ir))

    def callee_name(self, inst: Instruction) -> Optional[str]:
        idx = self.icfg.callees.get(inst.id)
        return self.ir.functions[idx].name if idx is not None else None

    def mapping_slots_stored_by(self, fn_name: str) -> set[SlotId]:
        fn = self.ir.function(fn_name)
        if fn is None:
            return set()
        return {i.slot for i in fn.instructions if i.kind == "SStore" and i.slot.is_mapping_base}


def sink_candidates(inst: Instruction, ctx: SinkContext) -> list[tuple[str, tuple[ValueRef, ...]]]:
    """Structural sink matches in priority order, each with the operands that must be tainted."""
    out: list[tuple[str, tuple[ValueRef, ...]]] = []
    transfer = ctx.facts.transfer_at(inst.id)
    if transfer is not None:
        out.append(("EtherTokenTransfer", (transfer.amount,)))
    callee = ctx.callee_name(inst) if inst.kind == "InternalCall" else None
    if callee is not None and callee in ctx.ledger_functions:
        out.append(("InternalLedgerUpdate", tuple(inst.operands)))
    if inst.kind == "SStore" and inst.slot.is_mapping_base:
        out.append(("EconomicStateWrite", (inst.stored_value,)))
    return out


def sink_labels(inst: Instruction, tmap: TaintMap, ctx: SinkContext) -> tuple[Optional[str], list[TaintLabel]]:
    for kind, operands in sink_candidates(inst, ctx):
        labels: list[TaintLabel] = []
        for op in operands:
            c = normalize(op, ctx.ir, ctx.icfg)
            if c is not None:
                labels.extend(tmap.labels(c))
        if labels:
            return kind, sorted(set(labels))
    return None, []


def is_sink(inst: Instruction, tmap: TaintMap, ctx: SinkContext) -> Optional[str]:
    """The sink kind of ``inst`` under ``tmap``, or None."""
    return sink_labels(inst, tmap, ctx)[0]
