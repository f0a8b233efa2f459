"""Guard-shape recognition over the IR: sender checks, cooldowns, effects-before-interactions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .config import AnalysisConfig
from .ir.model import Const, ContractIR, FunctionIR, Instruction, Local, SlotId, TxProperty, ValueRef


@dataclass(frozen=True)
class Match:
    location: str  # instruction id or modifier name
    evidence: str
    function: str


class DefIndex:
    """Single-assignment def lookup within one function."""

    def __init__(self, fn: FunctionIR):
        self.fn = fn
        self.defs: dict[ValueRef, Instruction] = {}
        for inst in fn.instructions:
            if inst.result is not None:
                self.defs[inst.result] = inst

    def resolve(self, ref: ValueRef, depth: int = 0) -> Optional[Instruction]:
        """Defining instruction, looking through plain copies."""
        inst = self.defs.get(ref)
        while inst is not None and inst.kind == "Assign" and inst.op is None and len(inst.operands) == 1 \
                and depth < 32 and inst.operands[0] in self.defs:
            inst = self.defs[inst.operands[0]]
            depth += 1
        return inst

    def is_tx(self, ref: ValueRef, name: str) -> bool:
        if isinstance(ref, TxProperty):
            return ref.name == name
        inst = self.resolve(ref)
        return (inst is not None and inst.kind == "Assign" and inst.op is None
                and len(inst.operands) == 1 and isinstance(inst.operands[0], TxProperty)
                and inst.operands[0].name == name)

    def state_read(self, ref: ValueRef) -> Optional[SlotId]:
        inst = self.resolve(ref)
        if inst is not None and inst.kind == "SLoad":
            return inst.slot
        return None

    def binop(self, ref: ValueRef) -> Optional[Instruction]:
        inst = self.resolve(ref)
        return inst if inst is not None and inst.kind == "BinOp" else None


def _render(ref: ValueRef, d: DefIndex) -> str:
    slot = d.state_read(ref)
    if slot is not None:
        return slot.render()
    for prop in ("msg.sender", "block.timestamp"):
        if d.is_tx(ref, prop):
            return prop
    if isinstance(ref, Const):
        return ref.literal
    b = d.binop(ref)
    if b is not None:
        return f"({_render(b.operands[0], d)} {b.op} {_render(b.operands[1], d)})"
    return str(ref)


def _reverting_branch(fn: FunctionIR, inst: Instruction) -> bool:
    """True when the taken edge of a CondJump leads straight to a Revert."""
    if inst.kind != "CondJump" or not inst.targets:
        return False
    t = inst.targets[0]
    return t < len(fn.instructions) and fn.instructions[t].kind == "Revert"


def guards(fn: FunctionIR) -> Iterator[tuple[Instruction, ValueRef, bool]]:
    """(instruction, condition, must_hold) for each Require and revert-guarded branch.

    ``must_hold`` is False for ``if (cond) revert`` where execution continues only if cond is false.
    """
    for inst in fn.instructions:
        if inst.kind == "Require" and inst.operands:
            yield inst, inst.operands[0], True
        elif _reverting_branch(fn, inst) and inst.operands:
            yield inst, inst.operands[0], False


# --- privilege ---------------------------------------------------------------

def _sender_test(ref: ValueRef, d: DefIndex, eq: str, junctions: tuple[str, ...], depth: int = 0) -> Optional[str]:
    b = d.binop(ref)
    if b is None or depth > 16:
        return None
    if b.op in junctions:
        for op in b.operands:
            hit = _sender_test(op, d, eq, junctions, depth + 1)
            if hit:
                return hit
        return None
    if b.op == eq:
        x, y = b.operands
        for s, o in ((x, y), (y, x)):
            if d.is_tx(s, "msg.sender") and d.state_read(o) is not None:
                return f"msg.sender {eq} {d.state_read(o).render()}"
    return None


def privilege_matches(ir: ContractIR, fn: FunctionIR, config: AnalysisConfig) -> list[Match]:
    out = [Match(m.name, f"privileged modifier {m.name}", fn.name)
           for m in fn.modifiers if m.name in config.privileged_modifiers]
    d = DefIndex(fn)
    for inst, cond, must_hold in guards(fn):
        if must_hold:
            hit = _sender_test(cond, d, "==", ("||", "&&"))
        else:
            hit = _sender_test(cond, d, "!=", ("&&", "||"))
        if hit:
            shape = f"require({hit})" if must_hold else f"if ({hit}) revert"
            out.append(Match(str(inst.id), f"sender guard {shape}", fn.name))
    return out


# --- temporal ----------------------------------------------------------------

def _state_or_const(ref: ValueRef, d: DefIndex) -> bool:
    return isinstance(ref, Const) or d.state_read(ref) is not None


def _delay_sum(ref: ValueRef, d: DefIndex) -> bool:
    """S + C with S a state read and C a constant or state read (either order)."""
    b = d.binop(ref)
    if b is None or b.op not in ("+", "-"):
        return False
    x, y = b.operands
    if b.op == "-":
        return d.state_read(x) is not None and _state_or_const(y, d)
    return (d.state_read(x) is not None and _state_or_const(y, d)) or \
           (d.state_read(y) is not None and _state_or_const(x, d))


def _elapsed(ref: ValueRef, d: DefIndex) -> bool:
    """ts - S with S a state read."""
    b = d.binop(ref)
    return b is not None and b.op == "-" and d.is_tx(b.operands[0], "block.timestamp") \
        and d.state_read(b.operands[1]) is not None


def _cooldown(cond: ValueRef, d: DefIndex, must_hold: bool) -> bool:
    b = d.binop(cond)
    if b is None:
        return False
    x, y = b.operands
    ts = lambda r: d.is_tx(r, "block.timestamp")  # noqa: E731
    if must_hold:
        if b.op in (">=", ">"):
            return (ts(x) and _delay_sum(y, d)) or (_elapsed(x, d) and _state_or_const(y, d))
        if b.op in ("<=", "<"):
            return (ts(y) and _delay_sum(x, d)) or (_elapsed(y, d) and _state_or_const(x, d))
        return False
    if b.op in ("<", "<="):
        return (ts(x) and _delay_sum(y, d)) or (_elapsed(x, d) and _state_or_const(y, d))
    if b.op in (">", ">="):
        return (ts(y) and _delay_sum(x, d)) or (_elapsed(y, d) and _state_or_const(x, d))
    return False


def temporal_matches(ir: ContractIR, fn: FunctionIR) -> list[Match]:
    out = []
    d = DefIndex(fn)
    for inst, cond, must_hold in guards(fn):
        if _cooldown(cond, d, must_hold):
            text = _render(cond, d)
            shape = f"require{text}" if must_hold else f"if {text} revert"
            out.append(Match(str(inst.id), f"cooldown guard {shape}", fn.name))
    return out


# --- fee-on-transfer ------------------------------------------------------------

def balance_slots(ir: ContractIR, config: AnalysisConfig) -> set[int]:
    """Base slots treated as balance mappings."""
    out = {v.slot for v in ir.state_vars if v.is_mapping and v.name in config.balance_names}
    for fn in ir.functions:
        if fn.name in config.transfer_functions:
            out |= {i.slot.base_slot for i in fn.instructions if i.kind == "SStore" and i.slot.is_mapping_base}
    return out


def _events(ir: ContractIR, fn: FunctionIR, stack: tuple[str, ...] = ()) -> Iterator[Instruction]:
    """Instructions of ``fn`` in order, with resolved internal callees expanded in place."""
    for inst in fn.instructions:
        yield inst
        if inst.kind == "InternalCall" and not inst.extra.get("unresolved"):
            callee = ir.function(inst.callee or "")
            if callee is not None and callee.name not in stack and callee.name != fn.name:
                yield from _events(ir, callee, stack + (fn.name,))


def effects_before_router_calls(ir: ContractIR, fn: FunctionIR, config: AnalysisConfig) -> Optional[str]:
    """Evidence text when every balance store precedes every external call and all calls are router calls."""
    balances = balance_slots(ir, config)
    events = list(_events(ir, fn))
    stores = [k for k, i in enumerate(events) if i.kind == "SStore" and i.slot.base_slot in balances]
    calls = [k for k, i in enumerate(events) if i.kind in ("ExternalCall", "LowLevelCall")]
    if not stores or not calls:
        return None
    if max(stores) >= min(calls):
        return None
    names = [events[k].callee or events[k].op or "" for k in calls]
    if not all(events[k].kind == "ExternalCall" and n in config.router_functions for k, n in zip(calls, names)):
        return None
    first_call = events[min(calls)]
    return (f"{fn.name}: {len(stores)} balance store(s) ending at {events[max(stores)].id} "
            f"precede router call {names[0]} at {first_call.id}")
