"""The propagation relation: one Flow per (read carrier, written carrier, instruction).

Rule families:
  data           operands of Assign/BinOp/Phi, and arguments of opaque internal calls, to the result
  call-arg       argument i of a resolved internal call to the callee's parameter i
  return         operand k of the callee's Return to CallReturn(call site, k)
  storage-write  stored value to the written slot
  storage-read   a written slot to the result of every aliasing SLoad
  control        a branch condition to the result of each control-dependent instruction
External and low-level calls are frontier nodes: nothing flows into their results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..ir.cfg import ICFG
from ..ir.model import CallReturn, ContractIR, InstId, Instruction, Local, Param, SlotId, ValueRef
from .model import Carrier

RULES = ("data", "call-arg", "return", "storage-write", "storage-read", "control")


@dataclass(frozen=True)
class Flow:
    inst: InstId
    src: Carrier
    dst: Carrier
    rule: str
    extra_steps: tuple[InstId, ...] = ()

    @property
    def steps(self) -> tuple[InstId, ...]:
        return (self.inst,) + self.extra_steps


def normalize(ref: Optional[ValueRef], ir: ContractIR, icfg: ICFG) -> Optional[Carrier]:
    """Map a value reference to its taint carrier, or None when it cannot carry taint."""
    if isinstance(ref, (Local, Param)):
        return ref
    if isinstance(ref, CallReturn):
        if ref.inst in icfg.callees:
            return ref
        return CallReturn(ref.inst, 0)
    return None


def result_carriers(inst: Instruction, ir: ContractIR, icfg: ICFG) -> list[Carrier]:
    """Carriers an instruction defines; an SStore defines its slot."""
    if inst.kind == "SStore":
        return [inst.slot]
    if inst.result is None:
        return []
    if inst.id in icfg.callees:
        callee = ir.functions[icfg.callees[inst.id]]
        return [CallReturn(inst.id, k) for k in range(max(1, len(callee.returns)))]
    c = normalize(inst.result, ir, icfg)
    return [c] if c is not None else []


def build_flows(ir: ContractIR, icfg: ICFG) -> list[Flow]:
    flows: list[Flow] = []
    stored_slots: list[SlotId] = []
    loads: list[Instruction] = []
    for fn in ir.functions:
        for inst in fn.instructions:
            k = inst.kind
            if k in ("Assign", "BinOp", "Phi"):
                dst = normalize(inst.result, ir, icfg)
                if dst is None:
                    continue
                for op in inst.operands:
                    src = normalize(op, ir, icfg)
                    if src is not None:
                        flows.append(Flow(inst.id, src, dst, "data"))
            elif k == "InternalCall":
                if inst.id in icfg.callees:
                    callee = ir.functions[icfg.callees[inst.id]]
                    for i, op in enumerate(inst.operands):
                        src = normalize(op, ir, icfg)
                        if src is not None and i < len(callee.params):
                            flows.append(Flow(inst.id, src, Param(callee.name, i), "call-arg"))
                else:
                    dst = CallReturn(inst.id, 0)
                    for op in inst.operands:
                        src = normalize(op, ir, icfg)
                        if src is not None:
                            flows.append(Flow(inst.id, src, dst, "data"))
            elif k == "Return":
                for cs in icfg.callers.get(fn.index, []):
                    for i, op in enumerate(inst.operands):
                        src = normalize(op, ir, icfg)
                        if src is not None:
                            flows.append(Flow(inst.id, src, CallReturn(cs, i), "return", (cs,)))
            elif k == "SStore":
                src = normalize(inst.stored_value, ir, icfg)
                stored_slots.append(inst.slot)
                if src is not None:
                    flows.append(Flow(inst.id, src, inst.slot, "storage-write"))
            elif k == "SLoad":
                loads.append(inst)
    written = list(dict.fromkeys(stored_slots))
    for inst in loads:
        dst = normalize(inst.result, ir, icfg)
        if dst is None:
            continue
        for slot in written:
            if slot.aliases(inst.slot):
                flows.append(Flow(inst.id, slot, dst, "storage-read"))
    for branch, dependents in icfg.branch_dependents().items():
        b = ir.instruction(branch)
        if b.kind not in ("CondJump", "Require") or not b.operands:
            continue
        cond = normalize(b.operands[0], ir, icfg)
        if cond is None:
            continue
        for y in dependents:
            for dst in result_carriers(ir.instruction(y), ir, icfg):
                flows.append(Flow(branch, cond, dst, "control", (y,)))
    return flows
