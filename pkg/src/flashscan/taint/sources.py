"""Initial taint sources."""

from __future__ import annotations

from collections import deque
from typing import Optional

from ..config import AnalysisConfig
from ..ir.cfg import ICFG
from ..ir.model import CallReturn, ContractIR, Instruction, Param, TxProperty
from .flows import Flow, build_flows, normalize
from .model import Carrier, TaintLabel, TaintMap


def mul_div_reachable(ir: ContractIR, icfg: ICFG, flows: Optional[list[Flow]] = None) -> set[Carrier]:
    """Carriers from which explicit def-use reaches an operand of a ``*`` or ``/`` BinOp."""
    flows = flows if flows is not None else build_flows(ir, icfg)
    back: dict[Carrier, list[Carrier]] = {}
    for f in flows:
        if f.rule != "control":
            back.setdefault(f.dst, []).append(f.src)
    seeds = set()
    for inst in ir.instructions():
        if inst.kind == "BinOp" and inst.op in ("*", "/"):
            for op in inst.operands:
                c = normalize(op, ir, icfg)
                if c is not None:
                    seeds.add(c)
    seen = set(seeds)
    queue = deque(seeds)
    while queue:
        c = queue.popleft()
        for p in back.get(c, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def classify_call_source(inst: Instruction, config: AnalysisConfig, reaches_mul_div: set[Carrier]) -> Optional[str]:
    if inst.kind != "ExternalCall":
        return None
    if inst.callee in config.dex_functions:
        return "KnownDexCall"
    if inst.mutability in ("view", "pure") and CallReturn(inst.id, 0) in reaches_mul_div:
        return "OracleViewCall"
    return None


def identify_sources(ir: ContractIR, icfg: ICFG, config: Optional[AnalysisConfig] = None,
                     flows: Optional[list[Flow]] = None) -> TaintMap:
    config = config or AnalysisConfig()
    reach = mul_div_reachable(ir, icfg, flows)
    tmap = TaintMap()
    for fn in ir.functions:
        if fn.is_public:
            for i in range(len(fn.params)):
                tmap.add(Param(fn.name, i), TaintLabel(f"{fn.entry}#p{i}", "PublicInput", (fn.entry,)))
        for inst in fn.instructions:
            if inst.kind == "Assign" and inst.result is not None:
                props = [o.name for o in inst.operands if isinstance(o, TxProperty) and o.name in config.tx_sources]
                for prop in props:
                    tmap.add(inst.result, TaintLabel(f"{inst.id}#{prop}", "TxProperty", (inst.id,)))
            kind = classify_call_source(inst, config, reach)
            if kind is not None:
                tmap.add(CallReturn(inst.id, 0), TaintLabel(str(inst.id), kind, (inst.id,)))
    return tmap
