from hypothesis import given, settings, strategies as st

import oracle
from conftest import lower
from flashscan.grouping import GroupKey, compute_key, group_paths, summarize_group
from flashscan.ir import InstId, build_icfg
from flashscan.taint import TaintPath, analyze_taint
from small_contracts import SMALL

FUNCS = ["f", "g", "h"]
KINDS = ["ExternalCall", "SStore", "SLoad", "BinOp", "Assign", "InternalCall"]


@st.composite
def path_sets(draw):
    """Random instruction table plus paths drawn over it; descriptors belong to instructions."""
    n_inst = draw(st.integers(3, 14))
    table = {}
    for k in range(n_inst):
        iid = InstId(draw(st.integers(0, 2)), k)
        kind = draw(st.sampled_from(KINDS))
        key = draw(st.sampled_from(["a", "b", "bal[*]", "getReserves"]))
        table[iid] = (kind, key, tuple(draw(st.lists(st.sampled_from(["local", "param", "const"]), max_size=2))))
    insts = sorted(table)
    paths = set()
    for _ in range(draw(st.integers(0, 12))):
        steps = tuple(draw(st.lists(st.sampled_from(insts), min_size=1, max_size=8)))
        paths.add(make_path(steps, table, draw(st.sampled_from(["s1", "s2"]))))
    return table, paths


def make_path(steps, table, sid="s1"):
    return TaintPath(
        source=(steps[0], "PublicInput"), sink=(steps[-1], "EconomicStateWrite"), steps=steps,
        source_function=FUNCS[steps[0].func], sink_function=FUNCS[steps[-1].func],
        source_id=sid, descriptors=tuple(table[s] for s in steps))


@settings(max_examples=1000, deadline=None)
@given(path_sets())
def test_grouping_laws(data):
    table, paths = data
    groups = group_paths(paths)
    # partition
    members = [p for g in groups for p in g.members]
    assert len(members) == len(paths) and set(members) == paths
    assert len({g.key for g in groups}) == len(groups)
    for g in groups:
        assert all(compute_key(p) == g.key for p in g.members)
        # representative maximality
        assert g.representative in g.members
        assert all(len(p) <= len(g.representative) for p in g.members)
        longest = [p for p in g.members if len(p) == len(g.representative)]
        assert g.representative.steps == min(p.steps for p in longest)
    # idempotence
    again = group_paths({g.representative for g in groups})
    assert [g.key for g in again] == [g.key for g in groups]
    assert all(len(g.members) == 1 for g in again)
    # deterministic regardless of input order
    assert [g.key for g in group_paths(sorted(paths, key=lambda p: p.steps, reverse=True))] == [g.key for g in groups]


@settings(max_examples=300, deadline=None)
@given(path_sets(), st.randoms(use_true_random=False))
def test_keys_survive_instruction_renaming(data, rnd):
    table, paths = data
    old = sorted(table)
    new = list(old)
    rnd.shuffle(new)
    # renaming keeps each instruction's function, as ids only move within a function body
    rename = {}
    for f in {i.func for i in old}:
        src = [i for i in old if i.func == f]
        dst = [InstId(f, 100 + k) for k in range(len(src))]
        rnd.shuffle(dst)
        rename.update(zip(src, dst))
    table2 = {rename[i]: d for i, d in table.items()}
    for p in paths:
        q = make_path(tuple(rename[s] for s in p.steps), table2, p.source_id)
        assert compute_key(q) == compute_key(p)
    assert sorted(len(g.members) for g in group_paths(paths)) == sorted(
        len(g.members) for g in group_paths({make_path(tuple(rename[s] for s in p.steps), table2, p.source_id) for p in paths}))


def test_empty_input():
    assert group_paths([]) == []


def test_no_critical_ops_key():
    table = {InstId(0, 0): ("Assign", "", ()), InstId(0, 1): ("BinOp", "+", ())}
    k = compute_key(make_path((InstId(0, 0), InstId(0, 1)), table))
    assert k.critical_ops == frozenset()
    assert k.render() == "<f, f, {}>"


def test_zzf_groups(zzf, zzf_icfg, config):
    groups = group_paths(analyze_taint(zzf, zzf_icfg).paths)
    rendered = [g.key.render() for g in groups]
    assert "<burnToHolder, burnFeeRewards, {EC:getAmountsOut, SSTORE:burnAmount}>" in rendered
    assert "<burnToHolder, burnFeeRewards, {EC:getAmountsOut}>" in rendered
    assert sum(len(g.members) for g in groups) == 5
    s = summarize_group(groups[1], zzf, config)
    assert "burnAmount" in s.affected_states
    assert s.to_text() == summarize_group(groups[1], zzf, config).to_text()


def test_empty_critical_ops_render_none(zzf, zzf_icfg, config):
    g = next(g for g in group_paths(analyze_taint(zzf, zzf_icfg).paths) if not g.key.critical_ops)
    assert summarize_group(g, zzf, config).binding("critical operations") == "none"


def _independent_key(ir, steps):
    names = {ir.function_of(steps[0]).name, ir.function_of(steps[-1]).name}
    crit = set()
    for s in steps:
        inst = ir.instruction(s)
        if inst.kind == "ExternalCall":
            crit.add(("call", inst.callee))
        elif inst.kind == "SStore":
            crit.add(("store", inst.operands[0].slot.render()))
    return (ir.function_of(steps[0]).name, ir.function_of(steps[-1]).name, frozenset(crit)), names


def test_loop_paths_collapse_as_enumeration_predicts():
    src = """
contract Loop {
    mapping(address => uint256) bal;
    uint256 total;
    function f(uint256 n) external {
        uint256 acc = 0;
        for (uint256 i = 0; i < n; i++) {
            acc = acc + n;
        }
        bal[msg.sender] = acc;
        total = total + acc;
        bal[address(this)] = total;
    }
}"""
    ir = lower(src)
    engine_paths = analyze_taint(ir, build_icfg(ir)).paths
    expected: dict = {}
    for sid, steps, kind in oracle.paths(ir):
        key, _ = _independent_key(ir, steps)
        expected.setdefault(key, []).append(len(steps))
    groups = group_paths(engine_paths)
    assert len(engine_paths) == sum(len(v) for v in expected.values())
    assert len(groups) == len(expected) >= 2
    assert sorted(len(g.representative) for g in groups) == sorted(max(v) for v in expected.values())
    assert any(len(g.members) > 1 for g in groups)


def test_group_key_sort_is_total():
    a = GroupKey("a", "b", frozenset())
    b = GroupKey("a", "b", frozenset({("SStore", "x", ())}))
    assert sorted([b, a], key=GroupKey.sort_key) == sorted([a, b], key=GroupKey.sort_key)
