"""JSON interchange for lowered IR (irVersion 1).

Imported documents are validated against a JSON schema, then checked for
referential integrity (instruction ids, jump targets, call-return sites).
"""

from __future__ import annotations

from typing import Any

import jsonschema

from ..errors import FlashscanError
from .model import (
    INSTRUCTION_KINDS, CallReturn, Const, ContractIR, FunctionIR, InstId,
    Instruction, Local, ModifierUse, Param, SlotId, StateSlot, StateVarInfo,
    TxProperty, ValueRef,
)

IR_VERSION = 1

_VALUE_REF = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["Local", "Param", "StateSlot", "TxProperty", "Const", "CallReturn"]},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "Local"}}},
         "then": {"required": ["function", "name", "version"],
                  "properties": {"function": {"type": "string"}, "name": {"type": "string"},
                                 "version": {"type": "integer", "minimum": 0}}}},
        {"if": {"properties": {"kind": {"const": "Param"}}},
         "then": {"required": ["function", "index"],
                  "properties": {"function": {"type": "string"}, "index": {"type": "integer", "minimum": 0}}}},
        {"if": {"properties": {"kind": {"const": "StateSlot"}}},
         "then": {"required": ["slot"], "properties": {"slot": {"$ref": "#/$defs/slot"}}}},
        {"if": {"properties": {"kind": {"const": "TxProperty"}}},
         "then": {"required": ["name"], "properties": {"name": {"type": "string"}}}},
        {"if": {"properties": {"kind": {"const": "Const"}}},
         "then": {"required": ["literal"], "properties": {"literal": {"type": "string"}}}},
        {"if": {"properties": {"kind": {"const": "CallReturn"}}},
         "then": {"required": ["inst", "index"],
                  "properties": {"inst": {"$ref": "#/$defs/instId"}, "index": {"type": "integer", "minimum": 0}}}},
    ],
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["irVersion", "contract", "stateVars", "functions"],
    "properties": {
        "irVersion": {"const": IR_VERSION},
        "contract": {"type": "string", "minLength": 1},
        "path": {"type": "string"},
        "source": {"type": ["string", "null"]},
        "stateVars": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "type", "slot"],
                "properties": {
                    "name": {"type": "string"},
                    "type": {"type": "string"},
                    "slot": {"type": "integer", "minimum": -1},
                    "isMapping": {"type": "boolean"},
                    "constant": {"type": "boolean"},
                },
            },
        },
        "functions": {"type": "array", "items": {"$ref": "#/$defs/function"}},
    },
    "$defs": {
        "instId": {"type": "string", "pattern": "^[0-9]+:[0-9]+$"},
        "slot": {
            "type": "object",
            "required": ["baseSlot"],
            "properties": {
                "baseSlot": {"type": "integer", "minimum": 0},
                "path": {
                    "type": "array",
                    "items": {"type": "array", "minItems": 2, "maxItems": 2,
                              "prefixItems": [{"enum": ["key", "index", "member"]}, {"type": "string"}]},
                },
                "isMappingBase": {"type": "boolean"},
                "name": {"type": "string"},
            },
        },
        "valueRef": _VALUE_REF,
        "typedName": {
            "type": "object",
            "required": ["name", "type"],
            "properties": {"name": {"type": "string"}, "type": {"type": "string"}},
        },
        "function": {
            "type": "object",
            "required": ["name", "visibility", "instructions"],
            "properties": {
                "name": {"type": "string", "minLength": 1},
                "visibility": {"enum": ["public", "external", "internal", "private"]},
                "mutability": {"enum": ["default", "view", "pure", "payable"]},
                "kind": {"enum": ["function", "constructor", "receive", "fallback"]},
                "modifiers": {
                    "type": "array",
                    "items": {
                        "oneOf": [
                            {"type": "string"},
                            {"type": "object", "required": ["name"],
                             "properties": {"name": {"type": "string"},
                                            "args": {"type": "array", "items": {"type": "string"}}}},
                        ],
                    },
                },
                "params": {"type": "array", "items": {"$ref": "#/$defs/typedName"}},
                "returns": {"type": "array", "items": {"$ref": "#/$defs/typedName"}},
                "span": {"oneOf": [{"type": "null"},
                                   {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}]},
                "instructions": {"type": "array", "items": {"$ref": "#/$defs/instruction"}},
            },
        },
        "instruction": {
            "type": "object",
            "required": ["id", "kind"],
            "properties": {
                "id": {"$ref": "#/$defs/instId"},
                "kind": {"enum": list(INSTRUCTION_KINDS)},
                "operands": {"type": "array", "items": {"$ref": "#/$defs/valueRef"}},
                "result": {"oneOf": [{"type": "null"}, {"$ref": "#/$defs/valueRef"}]},
                "span": {"oneOf": [{"type": "null"},
                                   {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}]},
                "op": {"type": ["string", "null"]},
                "callee": {"type": ["string", "null"]},
                "target": {"type": ["string", "null"]},
                "mutability": {"type": ["string", "null"]},
                "receiver": {"oneOf": [{"type": "null"}, {"$ref": "#/$defs/valueRef"}]},
                "targets": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "extra": {"type": "object"},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


# --- encoding ---------------------------------------------------------------

def encode_slot(slot: SlotId) -> dict:
    return {"baseSlot": slot.base_slot, "path": [list(p) for p in slot.path],
            "isMappingBase": slot.is_mapping_base, "name": slot.name}


def encode_ref(v: ValueRef) -> dict:
    if isinstance(v, Local):
        return {"kind": "Local", "function": v.function, "name": v.name, "version": v.version}
    if isinstance(v, Param):
        return {"kind": "Param", "function": v.function, "index": v.index}
    if isinstance(v, StateSlot):
        return {"kind": "StateSlot", "slot": encode_slot(v.slot)}
    if isinstance(v, TxProperty):
        return {"kind": "TxProperty", "name": v.name}
    if isinstance(v, Const):
        return {"kind": "Const", "literal": v.literal}
    if isinstance(v, CallReturn):
        return {"kind": "CallReturn", "inst": str(v.inst), "index": v.index}
    raise TypeError(f"not a value reference: {v!r}")


def _encode_extra(value: Any) -> Any:
    if isinstance(value, (Local, Param, StateSlot, TxProperty, Const, CallReturn)):
        return {"$ref": encode_ref(value)}
    if isinstance(value, (list, tuple)):
        return [_encode_extra(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode_extra(v) for k, v in value.items()}
    return value


def _encode_inst(inst: Instruction) -> dict:
    return {
        "id": str(inst.id),
        "kind": inst.kind,
        "operands": [encode_ref(o) for o in inst.operands],
        "result": encode_ref(inst.result) if inst.result is not None else None,
        "span": list(inst.span) if inst.span else None,
        "op": inst.op,
        "callee": inst.callee,
        "target": inst.target,
        "mutability": inst.mutability,
        "receiver": encode_ref(inst.receiver) if inst.receiver is not None else None,
        "targets": list(inst.targets),
        "extra": _encode_extra(inst.extra),
    }


def export_ir_json(ir: ContractIR) -> dict:
    """Serialize a ContractIR; instructions appear in (function, index) order."""
    return {
        "irVersion": IR_VERSION,
        "contract": ir.name,
        "path": ir.path,
        "source": ir.source,
        "stateVars": [{"name": v.name, "type": v.type, "slot": v.slot,
                       "isMapping": v.is_mapping, "constant": v.constant} for v in ir.state_vars],
        "functions": [{
            "name": fn.name,
            "visibility": fn.visibility,
            "mutability": fn.mutability,
            "kind": fn.kind,
            "modifiers": [{"name": m.name, "args": list(m.args)} for m in fn.modifiers],
            "params": [{"name": n, "type": t} for n, t in fn.params],
            "returns": [{"name": n, "type": t} for n, t in fn.returns],
            "span": list(fn.span) if fn.span else None,
            "instructions": [_encode_inst(i) for i in fn.instructions],
        } for fn in ir.functions],
    }


# --- decoding ---------------------------------------------------------------

def _decode_slot(d: dict) -> SlotId:
    return SlotId(d["baseSlot"], tuple((k, v) for k, v in d.get("path", [])),
                  is_mapping_base=d.get("isMappingBase", False), name=d.get("name", ""))


def decode_ref(d: dict) -> ValueRef:
    kind = d["kind"]
    if kind == "Local":
        return Local(d["function"], d["name"], d["version"])
    if kind == "Param":
        return Param(d["function"], d["index"])
    if kind == "StateSlot":
        return StateSlot(_decode_slot(d["slot"]))
    if kind == "TxProperty":
        return TxProperty(d["name"])
    if kind == "Const":
        return Const(d["literal"])
    return CallReturn(InstId.parse(d["inst"]), d["index"])


def _decode_extra(value: Any) -> Any:
    if isinstance(value, dict):
        if set(value) == {"$ref"}:
            return decode_ref(value["$ref"])
        return {k: _decode_extra(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode_extra(v) for v in value]
    return value


def _path(parts) -> str:
    return "/" + "/".join(str(p) for p in parts)


def import_ir_json(doc: Any) -> ContractIR:
    """Build a ContractIR from an interchange document, or raise schema-violation."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise FlashscanError("schema-violation", err.message, _path(err.absolute_path))
    ir = ContractIR(name=doc["contract"], source=doc.get("source"), path=doc.get("path", ""))
    for v in doc["stateVars"]:
        ir.state_vars.append(StateVarInfo(
            v["name"], v["type"], v["slot"],
            v.get("isMapping", v["type"].replace(" ", "").startswith("mapping(")),
            v.get("constant", v["slot"] < 0)))
    names = set()
    for fi, f in enumerate(doc["functions"]):
        if f["name"] in names:
            raise FlashscanError("schema-violation", f"duplicate function name {f['name']!r}", _path(["functions", fi, "name"]))
        names.add(f["name"])
        mods = []
        for m in f.get("modifiers", []):
            mods.append(ModifierUse(m) if isinstance(m, str) else ModifierUse(m["name"], list(m.get("args", []))))
        fn = FunctionIR(
            name=f["name"], index=fi, visibility=f["visibility"],
            mutability=f.get("mutability", "default"), kind=f.get("kind", "function"),
            params=[(p["name"], p["type"]) for p in f.get("params", [])],
            returns=[(p["name"], p["type"]) for p in f.get("returns", [])],
            modifiers=mods, span=tuple(f["span"]) if f.get("span") else None,
        )
        raw = f["instructions"]
        if not raw:
            fn.instructions = [
                Instruction(InstId(fi, 0), "Entry", extra={"params": [n for n, _ in fn.params]}),
                Instruction(InstId(fi, 1), "Return"),
            ]
        for ii, d in enumerate(raw):
            where = ["functions", fi, "instructions", ii]
            iid = InstId.parse(d["id"])
            if iid != InstId(fi, ii):
                raise FlashscanError("schema-violation", f"instruction id {d['id']} out of order, expected {fi}:{ii}",
                                     _path(where + ["id"]))
            for t in d.get("targets", []):
                if t >= len(raw):
                    raise FlashscanError("schema-violation", f"jump target {t} out of range", _path(where + ["targets"]))
            fn.instructions.append(Instruction(
                id=iid, kind=d["kind"],
                operands=tuple(decode_ref(o) for o in d.get("operands", [])),
                result=decode_ref(d["result"]) if d.get("result") else None,
                span=tuple(d["span"]) if d.get("span") else None,
                op=d.get("op"), callee=d.get("callee"), target=d.get("target"),
                mutability=d.get("mutability"),
                receiver=decode_ref(d["receiver"]) if d.get("receiver") else None,
                targets=tuple(d.get("targets", [])),
                extra=_decode_extra(d.get("extra", {})),
            ))
        if raw and fn.instructions[0].kind != "Entry":
            raise FlashscanError("schema-violation", "first instruction must be Entry",
                                 _path(["functions", fi, "instructions", 0, "kind"]))
        ir.functions.append(fn)
    _check_call_returns(ir)
    return ir


def _check_call_returns(ir: ContractIR) -> None:
    for fn in ir.functions:
        for inst in fn.instructions:
            for k, ref in enumerate((*inst.operands, inst.result)):
                if isinstance(ref, CallReturn):
                    f, i = ref.inst
                    ok = f < len(ir.functions) and i < len(ir.functions[f].instructions)
                    if not ok or ir.instruction(ref.inst).kind not in ("InternalCall", "ExternalCall", "LowLevelCall"):
                        raise FlashscanError("schema-violation", f"call return refers to non-call {ref.inst}",
                                             _path(["functions", fn.index, "instructions", inst.id.idx]))
