"""Primitive fact base extracted from lowered IR."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..config import AnalysisConfig
from .model import CallReturn, ContractIR, InstId, SlotId, ValueRef


@dataclass(frozen=True)
class CallFact:
    cs: InstId
    callee: str
    args: tuple[ValueRef, ...]
    ret: Optional[ValueRef]


@dataclass(frozen=True)
class ExternalCallFact:
    cs: InstId
    callee: str
    target: Optional[str]
    mutability: Optional[str]
    args: tuple[ValueRef, ...]
    ret: Optional[ValueRef]


@dataclass(frozen=True)
class StoreFact:
    inst: InstId
    slot: SlotId
    value: ValueRef


@dataclass(frozen=True)
class TransferFact:
    cs: InstId
    recipient: Optional[ValueRef]
    amount: ValueRef


@dataclass(frozen=True)
class ArgFact:
    cs: InstId
    index: int
    value: ValueRef


@dataclass
class Facts:
    calls: list[CallFact] = field(default_factory=list)
    external_calls: list[ExternalCallFact] = field(default_factory=list)
    stores: list[StoreFact] = field(default_factory=list)
    public: set[str] = field(default_factory=set)
    transfers: list[TransferFact] = field(default_factory=list)
    args: list[ArgFact] = field(default_factory=list)
    mapping_slots: set[SlotId] = field(default_factory=set)

    def transfer_at(self, cs: InstId) -> Optional[TransferFact]:
        for t in self.transfers:
            if t.cs == cs:
                return t
        return None

    def is_mapping_slot(self, slot: SlotId) -> bool:
        return slot.is_mapping_base

    def ledger_functions(self, ir: ContractIR) -> set[str]:
        """Functions f with IsLedgerUpdate(f): not public and storing to a mapping slot."""
        out = set()
        for s in self.stores:
            fn = ir.function_of(s.inst)
            if fn.name not in self.public and s.slot.is_mapping_base:
                out.add(fn.name)
        return out


def extract_primitives(ir: ContractIR, config: Optional[AnalysisConfig] = None) -> Facts:
    config = config or AnalysisConfig()
    facts = Facts()
    for fn in ir.functions:
        if fn.is_public:
            facts.public.add(fn.name)
        for inst in fn.instructions:
            if inst.kind in ("InternalCall", "ExternalCall", "LowLevelCall"):
                name = inst.callee or inst.op or ""
                facts.calls.append(CallFact(inst.id, name, tuple(inst.operands), inst.result))
                for i, v in enumerate(inst.operands):
                    facts.args.append(ArgFact(inst.id, i, v))
            if inst.kind == "ExternalCall":
                facts.external_calls.append(ExternalCallFact(
                    inst.id, inst.callee or "", inst.target, inst.mutability,
                    tuple(inst.operands), inst.result))
            if inst.kind == "SStore":
                slot = inst.slot
                facts.stores.append(StoreFact(inst.id, slot, inst.stored_value))
                if slot.is_mapping_base:
                    facts.mapping_slots.add(slot)
            if inst.kind == "SLoad" and inst.slot.is_mapping_base:
                facts.mapping_slots.add(inst.slot)
            transfer = _transfer_fact(inst, config)
            if transfer is not None:
                facts.transfers.append(transfer)
    return facts


def _transfer_fact(inst, config: AnalysisConfig) -> Optional[TransferFact]:
    if inst.kind == "LowLevelCall":
        idx = inst.extra.get("amount_index")
        if idx is None or idx >= len(inst.operands):
            return None
        return TransferFact(inst.id, inst.receiver, inst.operands[idx])
    if inst.kind in ("ExternalCall", "InternalCall") and inst.callee in config.transfer_functions:
        r, a = config.transfer_functions[inst.callee]
        if a < len(inst.operands):
            recipient = inst.operands[r] if r < len(inst.operands) else None
            return TransferFact(inst.id, recipient, inst.operands[a])
    return None


def transfer_amount(inst, config: AnalysisConfig) -> Optional[ValueRef]:
    fact = _transfer_fact(inst, config)
    return fact.amount if fact else None


__all__ = [
    "ArgFact", "CallFact", "CallReturn", "ExternalCallFact", "Facts", "StoreFact",
    "TransferFact", "extract_primitives", "transfer_amount",
]
