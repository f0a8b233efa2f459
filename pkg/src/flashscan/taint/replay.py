"""Mechanical justification of each consecutive step pair of a TaintPath."""

from __future__ import annotations

from ..ir.cfg import ICFG
from ..ir.model import ContractIR, InstId, Instruction, Param
from .flows import normalize, result_carriers


class ReplayError(ValueError):
    pass


def _uses(inst: Instruction, ir: ContractIR, icfg: ICFG) -> set:
    out = {normalize(o, ir, icfg) for o in inst.operands}
    out.discard(None)
    return out


def _defs(inst: Instruction, ir: ContractIR, icfg: ICFG) -> set:
    out = set(result_carriers(inst, ir, icfg))
    if inst.kind == "Entry":
        fn = ir.function_of(inst.id)
        out |= {Param(fn.name, i) for i in range(len(fn.params))}
    return out


def justify(a: InstId, b: InstId, ir: ContractIR, icfg: ICFG) -> str:
    """Name the rule relating step ``a`` to step ``b``; raise ReplayError if none applies."""
    ia, ib = ir.instruction(a), ir.instruction(b)
    if ia.kind == "InternalCall" and a in icfg.callees:
        callee = ir.functions[icfg.callees[a]]
        if b.func == callee.index and any(isinstance(u, Param) and u.function == callee.name
                                          for u in _uses(ib, ir, icfg)):
            return "call-arg"
    if ia.kind == "Return" and icfg.callees.get(b) == a.func:
        return "return"
    if ia.kind == "SStore" and ib.kind == "SLoad" and ia.slot.aliases(ib.slot):
        return "storage"
    if ia.kind in ("CondJump", "Require") and a in icfg.control_deps.get(b, frozenset()):
        return "control"
    if _defs(ia, ir, icfg) & _uses(ib, ir, icfg):
        return "param" if ia.kind == "Entry" else "data"
    raise ReplayError(f"no rule relates {a} ({ia.kind}) to {b} ({ib.kind})")


def replay(path, ir: ContractIR, icfg: ICFG) -> list[str]:
    """Rule names for every consecutive pair of ``path.steps``."""
    steps = path.steps
    if not steps or steps[0] != path.source[0] or steps[-1] != path.sink[0]:
        raise ReplayError("path endpoints do not match its source and sink")
    return [justify(a, b, ir, icfg) for a, b in zip(steps, steps[1:])]
