"""Per-function CFGs, the inter-procedural CFG and control dependence."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend.nodes import Diagnostic, Span
from .model import ContractIR, FunctionIR, InstId, Instruction

EXIT = -1


def successors(fn: FunctionIR, idx: int) -> tuple[int, ...]:
    """Intra-procedural successors of instruction ``idx`` (no virtual exit)."""
    inst = fn.instructions[idx]
    if inst.kind in ("Jump", "CondJump"):
        return tuple(dict.fromkeys(inst.targets))
    if inst.kind in ("Return", "Revert"):
        return ()
    if idx + 1 < len(fn.instructions):
        return (idx + 1,)
    return ()


def _augmented(fn: FunctionIR) -> dict[int, list[int]]:
    """Successor map with a virtual exit; Require gets a failure edge to it."""
    n = len(fn.instructions)
    succ: dict[int, list[int]] = {}
    for i, inst in enumerate(fn.instructions):
        out = list(successors(fn, i))
        if inst.kind in ("Return", "Revert", "Require") or not out:
            out.append(EXIT)
        succ[i] = out
    succ[EXIT] = []
    # nodes that cannot reach the exit (infinite loops) get an artificial edge
    while True:
        pred: dict[int, list[int]] = {k: [] for k in succ}
        for a, outs in succ.items():
            for b in outs:
                pred[b].append(a)
        seen = {EXIT}
        stack = [EXIT]
        while stack:
            x = stack.pop()
            for p in pred[x]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        stuck = [i for i in range(n) if i not in seen]
        if not stuck:
            return succ
        succ[max(stuck)].append(EXIT)


def post_dominators(fn: FunctionIR) -> dict[int, frozenset[int]]:
    succ = _augmented(fn)
    nodes = list(succ)
    everything = frozenset(nodes)
    pdom = {k: everything for k in nodes}
    pdom[EXIT] = frozenset({EXIT})
    changed = True
    while changed:
        changed = False
        for k in reversed(nodes):
            if k == EXIT:
                continue
            outs = succ[k]
            inter = frozenset.intersection(*(pdom[s] for s in outs)) if outs else frozenset()
            new = inter | {k}
            if new != pdom[k]:
                pdom[k] = new
                changed = True
    return pdom


def control_dependence(fn: FunctionIR) -> dict[int, frozenset[int]]:
    """Map each instruction index to the branch indices it is control-dependent on."""
    succ = _augmented(fn)
    pdom = post_dominators(fn)
    deps: dict[int, set[int]] = {i: set() for i in range(len(fn.instructions))}
    for a, outs in succ.items():
        if a == EXIT or len(outs) < 2:
            continue
        strict = pdom[a] - {a}
        for s in outs:
            for y in pdom[s]:
                if y != EXIT and y not in strict:
                    deps[y].add(a)
    return {k: frozenset(v) for k, v in deps.items()}


@dataclass
class ICFG:
    nodes: list[InstId]
    intra_edges: set[tuple[InstId, InstId]]
    call_edges: set[tuple[InstId, InstId]]
    return_edges: set[tuple[InstId, InstId]]
    entry_points: list[InstId]
    # call site -> callee function index, for resolved internal calls only
    callees: dict[InstId, int] = field(default_factory=dict)
    # callee function index -> call sites
    callers: dict[int, list[InstId]] = field(default_factory=dict)
    control_deps: dict[InstId, frozenset[InstId]] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def succ(self, node: InstId) -> list[InstId]:
        return sorted(b for a, b in self.intra_edges if a == node)

    def branch_dependents(self) -> dict[InstId, list[InstId]]:
        out: dict[InstId, list[InstId]] = {}
        for y, branches in self.control_deps.items():
            for b in branches:
                out.setdefault(b, []).append(y)
        return {k: sorted(v) for k, v in sorted(out.items())}


def _exit_of(fn: FunctionIR) -> InstId:
    for inst in reversed(fn.instructions):
        if inst.kind == "Return":
            return inst.id
    return fn.instructions[-1].id


def build_icfg(ir: ContractIR) -> ICFG:
    nodes: list[InstId] = []
    intra: set = set()
    calls: set = set()
    rets: set = set()
    callees: dict[InstId, int] = {}
    callers: dict[int, list[InstId]] = {}
    cdeps: dict[InstId, frozenset[InstId]] = {}
    diags: list[Diagnostic] = []
    by_name = {fn.name: fn for fn in ir.functions}
    for fn in ir.functions:
        for i, inst in enumerate(fn.instructions):
            nodes.append(inst.id)
            for s in successors(fn, i):
                intra.add((inst.id, InstId(fn.index, s)))
        for y, branches in control_dependence(fn).items():
            cdeps[InstId(fn.index, y)] = frozenset(InstId(fn.index, b) for b in branches)
        for inst in fn.instructions:
            if inst.kind != "InternalCall":
                continue
            callee = by_name.get(inst.callee or "")
            if callee is None or inst.extra.get("unresolved"):
                span = Span(*inst.span) if inst.span else Span(0, 0)
                diags.append(Diagnostic("warning", span,
                                        f"internal callee {inst.callee!r} not found; call treated as opaque",
                                        "unresolved-internal-call"))
                continue
            calls.add((inst.id, callee.entry))
            rets.add((_exit_of(callee), inst.id))
            callees[inst.id] = callee.index
            callers.setdefault(callee.index, []).append(inst.id)
    entries = [fn.entry for fn in ir.functions if fn.is_public]
    return ICFG(nodes, intra, calls, rets, entries, callees, callers, cdeps, diags)


def resolved_callee(icfg: ICFG, inst: Instruction) -> int | None:
    return icfg.callees.get(inst.id)
