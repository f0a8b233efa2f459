import json

import pytest
from hypothesis import given, settings, strategies as st

import oracle
from conftest import lower
from flashscan.errors import FlashscanError
from flashscan.ir import (
    CallReturn, InstId, Param, SlotId, build_icfg, control_dependence, export_ir_json,
    extract_primitives, import_ir_json,
)
from small_contracts import SMALL


def kinds(fn):
    return [i.kind for i in fn.instructions]


def test_zzf_oracle_call_and_index(zzf):
    call = zzf.instruction(InstId(0, 11))
    assert call.kind == "ExternalCall" and call.callee == "getAmountsOut"
    idx = zzf.instruction(InstId(0, 14))
    assert idx.op == "index" and CallReturn(InstId(0, 11), 0) in idx.operands


def test_zzf_burn_amount_read_modify_write(zzf):
    fn = zzf.function("burnFeeRewards")
    load, add, store = (fn.instructions[i] for i in (4, 5, 6))
    assert (load.kind, add.kind, add.op, store.kind) == ("SLoad", "BinOp", "+", "SStore")
    assert store.slot.render() == "burnAmount[*]" and store.slot.is_mapping_base


def test_unresolved_transfer_helper(zzf, zzf_icfg):
    call = zzf.instruction(InstId(1, 3))
    assert call.kind == "InternalCall" and call.callee == "_transfer" and call.extra.get("unresolved")
    assert any(d.code == "unresolved-internal-call" for d in zzf_icfg.diagnostics)


def test_zzf_icfg_edges(zzf_icfg):
    assert zzf_icfg.call_edges == {(InstId(0, 24), InstId(1, 0))}
    assert zzf_icfg.return_edges == {(InstId(1, 7), InstId(0, 24))}
    assert zzf_icfg.entry_points == [InstId(0, 0)]


def test_require_controls_what_follows(zzf, zzf_icfg):
    deps = zzf_icfg.control_deps
    for k in range(22, 26):
        assert InstId(0, 21) in deps.get(InstId(0, k), frozenset())


def test_transfer_fact_and_ledger(zzf, config):
    facts = extract_primitives(zzf, config)
    t = facts.transfer_at(InstId(1, 3))
    assert t is not None and t.amount == Param("burnFeeRewards", 1)
    assert facts.ledger_functions(zzf) == {"burnFeeRewards"}


def test_phi_at_if_join():
    ir = lower(SMALL["branch_join"])
    fn = ir.functions[0]
    phis = [i for i in fn.instructions if i.kind == "Phi"]
    assert len(phis) == 1 and len(phis[0].operands) == 2


def test_loop_header_phi_and_single_exit():
    fn = lower(SMALL["loop_accumulate"]).functions[0]
    assert kinds(fn).count("Return") == 1
    assert sum(1 for i in fn.instructions if i.kind == "Phi") >= 2


def test_modifier_inlined_before_body():
    fn = lower(SMALL["modifier_inlined"]).function("set")
    ks = kinds(fn)
    assert ks.index("Require") < ks.index("SStore")
    assert [m.name for m in fn.modifiers] == ["onlyOwner"]


def test_slot_aliasing():
    a = SlotId(2, (("key", "*"),), True, "bal")
    b = SlotId(2, (("key", "const:1"),), True, "bal")
    c = SlotId(2, (("key", "const:2"),), True, "bal")
    assert a.aliases(b) and b.aliases(a)
    assert not b.aliases(c)
    assert not a.aliases(SlotId(3, (), False, "other"))


def _as_ids(fn):
    return {InstId(fn.index, y): {InstId(fn.index, b) for b in bs}
            for y, bs in control_dependence(fn).items() if bs}


@pytest.mark.parametrize("name", sorted(SMALL))
def test_control_dependence_matches_removal_oracle(name):
    ir = lower(SMALL[name])
    for fn in ir.functions:
        assert _as_ids(fn) == oracle.control_deps(fn)


def test_control_dependence_zzf(zzf):
    for fn in zzf.functions:
        assert _as_ids(fn) == oracle.control_deps(fn)


def test_interchange_round_trip(zzf):
    doc = export_ir_json(zzf)
    again = export_ir_json(import_ir_json(json.loads(json.dumps(doc))))
    assert again == doc


def test_interchange_rejects_unknown_kind(zzf):
    doc = export_ir_json(zzf)
    doc["functions"][0]["instructions"][3]["kind"] = "Teleport"
    with pytest.raises(FlashscanError) as e:
        import_ir_json(doc)
    assert e.value.code == "schema-violation"
    assert e.value.path == "/functions/0/instructions/3/kind"


def test_interchange_minimal_document():
    doc = {"irVersion": 1, "contract": "M", "path": "", "stateVars": [],
           "functions": [{"name": "f", "visibility": "external", "instructions": []}]}
    ir = import_ir_json(doc)
    assert build_icfg(ir).entry_points == [InstId(0, 0)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(SMALL)), st.data())
def test_interchange_survives_renaming_round_trip(name, data):
    ir = lower(SMALL[name])
    doc = export_ir_json(ir)
    assert export_ir_json(import_ir_json(doc)) == doc
