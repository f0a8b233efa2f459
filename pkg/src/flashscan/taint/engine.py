"""Fixpoint propagation and source-to-sink path reconstruction."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..config import AnalysisConfig
from ..ir.cfg import ICFG
from ..ir.model import ContractIR, InstId, SlotId
from .flows import Flow, build_flows
from .model import Carrier, Descriptor, TaintLabel, TaintMap, TaintPath, carrier_id
from .sinks import SinkContext, sink_labels
from .sources import identify_sources


@dataclass
class TaintContext:
    ir: ContractIR
    icfg: ICFG
    config: AnalysisConfig
    flows: list[Flow]

    @classmethod
    def build(cls, ir: ContractIR, icfg: ICFG, config: Optional[AnalysisConfig] = None) -> "TaintContext":
        return cls(ir, icfg, config or AnalysisConfig(), build_flows(ir, icfg))

    def ordered(self, order: Optional[Sequence[int]]) -> list[Flow]:
        return self.flows if order is None else [self.flows[i] for i in order]


@dataclass
class TaintResult:
    taint_map: TaintMap
    paths: list[TaintPath]
    iterations: int
    warnings: list[dict] = field(default_factory=list)
    capped_paths: int = 0
    dropped_labels: int = 0


def _extend(flow: Flow, label: TaintLabel, config: AnalysisConfig) -> Optional[TaintLabel]:
    if flow.rule == "control" and label.implicit:
        return None  # implicit flow has depth one
    prov = label.provenance + flow.steps
    for s in flow.steps:
        if prov.count(s) > config.max_provenance_repeats:
            return None
    return label.extend(flow.steps, implicit=flow.rule == "control")


class _Adder:
    """Adds labels to a map while enforcing the per-(carrier, source) label cap."""

    def __init__(self, tmap: TaintMap, cap: int):
        self.tmap = tmap
        self.cap = cap
        self.dropped = 0
        self.counts: Counter = Counter()
        for table in (tmap.var_taints, tmap.slot_taints):
            for c, labels in table.items():
                for lab in labels:
                    self.counts[(c, lab.source_id, lab.implicit)] += 1

    def add(self, carrier: Carrier, label: TaintLabel) -> bool:
        if label in self.tmap.labels(carrier):
            return False
        key = (carrier, label.source_id, label.implicit)
        if self.counts[key] >= self.cap:
            self.dropped += 1
            return False
        self.tmap.add(carrier, label)
        self.counts[key] += 1
        return True


def propagate(tmap: TaintMap, ir: ContractIR, icfg: ICFG, config: Optional[AnalysisConfig] = None,
              order: Optional[Sequence[int]] = None, ctx: Optional[TaintContext] = None) -> TaintMap:
    """One application of every propagation rule to every label of ``tmap``; returns a new map."""
    ctx = ctx or TaintContext.build(ir, icfg, config)
    new = tmap.copy()
    adder = _Adder(new, ctx.config.max_labels_per_source)
    for flow in ctx.ordered(order):
        for lab in sorted(tmap.labels(flow.src)):
            nl = _extend(flow, lab, ctx.config)
            if nl is not None:
                adder.add(flow.dst, nl)
    return new


def fixpoint(ir: ContractIR, icfg: ICFG, config: Optional[AnalysisConfig] = None,
             order: Optional[Sequence[int]] = None, ctx: Optional[TaintContext] = None,
             on_iteration: Optional[Callable[[int, TaintMap], None]] = None) -> tuple[TaintMap, int, list[dict], int]:
    """Iterate propagation from the initial sources until nothing changes.

    Each round pushes only the labels added in the previous round, which is
    equivalent to reapplying ``propagate`` to the whole map.
    """
    ctx = ctx or TaintContext.build(ir, icfg, config)
    cfg = ctx.config
    tmap = identify_sources(ir, icfg, cfg, ctx.flows)
    adder = _Adder(tmap, cfg.max_labels_per_source)
    delta: dict = {c: set(v) for c, v in list(tmap.var_taints.items()) + list(tmap.slot_taints.items())}
    flows = ctx.ordered(order)
    iterations = 0
    warnings: list[dict] = []
    if on_iteration:
        on_iteration(0, tmap.copy())
    while delta:
        if iterations >= cfg.max_iterations:
            warnings.append({"code": "fixpoint-budget-exceeded",
                             "message": f"stopped after {iterations} iterations; results are partial"})
            break
        iterations += 1
        new_delta: dict = defaultdict(set)
        for flow in flows:
            for lab in sorted(delta.get(flow.src, ())):
                nl = _extend(flow, lab, cfg)
                if nl is not None and adder.add(flow.dst, nl):
                    new_delta[flow.dst].add(nl)
        delta = dict(new_delta)
        if on_iteration:
            on_iteration(iterations, tmap.copy())
    if adder.dropped:
        warnings.append({"code": "label-cap", "message": f"{adder.dropped} labels dropped by the per-source cap"})
    return tmap, iterations, warnings, adder.dropped


def step_descriptor(ir: ContractIR, iid: InstId) -> Descriptor:
    inst = ir.instruction(iid)
    if inst.kind in ("SStore", "SLoad"):
        key = inst.slot.render()
    elif inst.kind in ("ExternalCall", "InternalCall"):
        key = inst.callee or ""
    else:
        key = inst.op or ""
    return (inst.kind, key, tuple(o.kind for o in inst.operands))


def build_path(ir: ContractIR, sctx: SinkContext, label: TaintLabel, sink: InstId, kind: str) -> TaintPath:
    steps = label.provenance + (sink,)
    sink_inst = ir.instruction(sink)
    sink_fn = ir.function_of(sink).name
    slots: set[SlotId] = set()
    for s in steps:
        inst = ir.instruction(s)
        if inst.kind in ("SStore", "SLoad"):
            slots.add(inst.slot)
    if kind == "InternalLedgerUpdate":
        sink_fn = sctx.callee_name(sink_inst) or sink_fn
        slots |= sctx.mapping_slots_stored_by(sink_fn)
    return TaintPath(
        source=(steps[0], label.source_kind),
        sink=(sink, kind),
        steps=steps,
        source_function=ir.function_of(steps[0]).name,
        sink_function=sink_fn,
        affected_slots=frozenset(slots),
        source_id=label.source_id,
        descriptors=tuple(step_descriptor(ir, s) for s in steps),
        implicit=label.implicit,
    )


def reconstruct_paths(ir: ContractIR, tmap: TaintMap, sctx: SinkContext,
                      cap: int) -> tuple[list[TaintPath], int]:
    """One path per (sink, label); at most ``cap`` per (source, sink) pair, shortest first."""
    out: list[TaintPath] = []
    capped = 0
    for inst in ir.instructions():
        kind, labels = sink_labels(inst, tmap, sctx)
        if kind is None:
            continue
        per_source: dict[str, dict] = defaultdict(dict)
        for lab in labels:
            key = lab.provenance
            seen = per_source[lab.source_id]
            # the explicit reading of a chain wins over an implicit duplicate
            if key not in seen or (seen[key].implicit and not lab.implicit):
                seen[key] = lab
        for sid in sorted(per_source):
            labs = sorted(per_source[sid].values(), key=lambda lab: (len(lab.provenance), lab.provenance))
            capped += max(0, len(labs) - cap)
            out.extend(build_path(ir, sctx, lab, inst.id, kind) for lab in labs[:cap])
    out.sort(key=lambda p: (p.sink[0], p.steps, p.source_id))
    return out, capped


def analyze_taint(ir: ContractIR, icfg: ICFG, config: Optional[AnalysisConfig] = None,
                  order: Optional[Sequence[int]] = None) -> TaintResult:
    ctx = TaintContext.build(ir, icfg, config)
    tmap, iterations, warnings, dropped = fixpoint(ir, icfg, ctx.config, order, ctx)
    sctx = SinkContext.build(ir, icfg, ctx.config)
    paths, capped = reconstruct_paths(ir, tmap, sctx, ctx.config.max_paths_per_pair)
    if capped:
        warnings.append({"code": "path-capped", "message": f"{capped} paths beyond the per-pair cap were not reconstructed"})
    return TaintResult(tmap, paths, iterations, warnings, capped, dropped)


def label_json(lab: TaintLabel) -> dict:
    return {"sourceId": lab.source_id, "sourceKind": lab.source_kind,
            "provenance": [str(s) for s in lab.provenance], "implicit": lab.implicit}


def path_json(p: TaintPath) -> dict:
    return {
        "source": {"inst": str(p.source[0]), "kind": p.source[1], "id": p.source_id},
        "sink": {"inst": str(p.sink[0]), "kind": p.sink[1]},
        "steps": [str(s) for s in p.steps],
        "sourceFunction": p.source_function,
        "sinkFunction": p.sink_function,
        "affectedSlots": sorted(s.render() for s in p.affected_slots),
        "implicit": p.implicit,
    }


def taint_debug_json(result: TaintResult) -> dict:
    """TaintMap and paths keyed by stable carrier and instruction ids."""
    tm = result.taint_map
    carriers = {}
    for table in (tm.var_taints, tm.slot_taints):
        for c, labels in table.items():
            if labels:
                carriers[carrier_id(c)] = [label_json(lab) for lab in sorted(labels)]
    return {
        "iterations": result.iterations,
        "taintMap": dict(sorted(carriers.items())),
        "paths": [path_json(p) for p in result.paths],
        "warnings": result.warnings,
    }
