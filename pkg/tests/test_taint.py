import random
import time

import pytest
from hypothesis import given, settings, strategies as st

import oracle
from conftest import fixture_ir, lower
from flashscan.config import AnalysisConfig
from flashscan.ir import InstId, build_icfg
from flashscan.taint import (
    TaintContext, TaintLabel, TaintMap, analyze_taint, fixpoint, identify_sources, propagate, replay,
)
from flashscan.taint.replay import ReplayError
from small_contracts import SMALL

EQUIV_NAMES = sorted(SMALL)


def ids(*pairs):
    return tuple(InstId(f, i) for f, i in pairs)


def small_ir(name):
    return fixture_ir("zzf.sol") if name == "zzf" else lower(SMALL[name])


# --- ZZF -------------------------------------------------------------------------

def test_zzf_paths(zzf, zzf_icfg):
    res = analyze_taint(zzf, zzf_icfg)
    got = {(p.source_kind, p.sink_kind, p.steps) for p in res.paths}
    assert got == {
        ("PublicInput", "InternalLedgerUpdate", ids((0, 0), (0, 24))),
        ("KnownDexCall", "InternalLedgerUpdate", ids((0, 11), (0, 14), (0, 15), (0, 24))),
        ("KnownDexCall", "EtherTokenTransfer", ids((0, 11), (0, 14), (0, 15), (0, 24), (1, 3))),
        ("KnownDexCall", "EconomicStateWrite", ids((0, 11), (0, 14), (0, 15), (0, 24), (1, 5), (1, 6))),
        ("KnownDexCall", "EconomicStateWrite",
         ids((0, 11), (0, 14), (0, 15), (0, 24), (1, 5), (1, 6), (1, 4), (1, 5), (1, 6))),
    }
    assert res.warnings == []


def test_zzf_ledger_path_names_callee_and_slots(zzf, zzf_icfg):
    res = analyze_taint(zzf, zzf_icfg)
    ledger = [p for p in res.paths if p.sink_kind == "InternalLedgerUpdate"]
    assert {p.sink_function for p in ledger} == {"burnFeeRewards"}
    assert all({s.render() for s in p.affected_slots} == {"burnAmount[*]"} for p in ledger)


def test_every_zzf_path_replays(zzf, zzf_icfg):
    for p in analyze_taint(zzf, zzf_icfg).paths:
        rules = replay(p, zzf, zzf_icfg)
        assert len(rules) == len(p.steps) - 1


def test_replay_rejects_spliced_path(zzf, zzf_icfg):
    p = analyze_taint(zzf, zzf_icfg).paths[0]
    bad = type(p)(p.source, p.sink, (p.steps[0], InstId(0, 2), p.steps[-1]), p.source_function, p.sink_function)
    with pytest.raises(ReplayError):
        replay(bad, zzf, zzf_icfg)


def test_sources(zzf, zzf_icfg, config):
    tmap = identify_sources(zzf, zzf_icfg, config)
    kinds = sorted({lab.source_kind for c in tmap.carriers() for lab in tmap.labels(c)})
    assert kinds == ["KnownDexCall", "PublicInput"]


def test_oracle_view_needs_arithmetic():
    src = """
interface IFeed { function price() external view returns (uint256); }
contract N {
    IFeed feed;
    mapping(address => uint256) last;
    function f() external { last[msg.sender] = feed.price(); }
}"""
    ir = lower(src)
    tmap = identify_sources(ir, build_icfg(ir), AnalysisConfig())
    assert not any(lab.source_kind == "OracleViewCall" for c in tmap.carriers() for lab in tmap.labels(c))
    ir2 = lower(SMALL["oracle_view_mul"])
    tmap2 = identify_sources(ir2, build_icfg(ir2), AnalysisConfig())
    assert any(lab.source_kind == "OracleViewCall" for c in tmap2.carriers() for lab in tmap2.labels(c))


def test_label_extend_and_order():
    a = TaintLabel("s", "PublicInput", ids((0, 0)))
    b = a.extend(ids((0, 3)), implicit=True)
    assert b.provenance == ids((0, 0), (0, 3)) and b.implicit and not a.implicit
    assert sorted([b, a])[0] == a


def test_taint_map_equality_ignores_empty_buckets():
    m = TaintMap()
    m.var_taints["x"] = set()
    assert m == TaintMap()


# --- oracle equivalence --------------------------------------------------------------

@pytest.mark.parametrize("name", EQUIV_NAMES + ["zzf"])
def test_tainted_pairs_match_oracle(name):
    ir = small_ir(name)
    assert sum(len(f.instructions) for f in ir.functions) <= 50
    res = analyze_taint(ir, build_icfg(ir))
    assert res.taint_map.tainted_pairs() == oracle.tainted_pairs(ir)


@pytest.mark.parametrize("name", EQUIV_NAMES + ["zzf"])
def test_paths_match_oracle(name):
    ir = small_ir(name)
    res = analyze_taint(ir, build_icfg(ir))
    assert {(p.source_id, p.steps, p.sink_kind) for p in res.paths} == oracle.paths(ir)


def test_oracle_equivalence_is_fast():
    start = time.perf_counter()
    for name in EQUIV_NAMES:
        ir = small_ir(name)
        analyze_taint(ir, build_icfg(ir))
    assert time.perf_counter() - start < 1.0


# --- fixpoint properties --------------------------------------------------------------

@pytest.mark.parametrize("name", EQUIV_NAMES + ["zzf"])
def test_each_round_is_monotone(name):
    ir = small_ir(name)
    snaps = []
    fixpoint(ir, build_icfg(ir), on_iteration=lambda k, m: snaps.append(m))
    assert len(snaps) >= 2
    for before, after in zip(snaps, snaps[1:]):
        assert before.issubset(after)


@pytest.mark.parametrize("name", EQUIV_NAMES + ["zzf"])
def test_propagate_is_inflationary_and_reaches_fixpoint(name):
    ir = small_ir(name)
    icfg = build_icfg(ir)
    ctx = TaintContext.build(ir, icfg)
    final, _, _, _ = fixpoint(ir, icfg, ctx=ctx)
    m = identify_sources(ir, icfg, ctx.config, ctx.flows)
    for _ in range(200):
        nxt = propagate(m, ir, icfg, ctx=ctx)
        assert m.issubset(nxt)
        if nxt == m:
            break
        m = nxt
    assert m == final


@pytest.mark.parametrize("name", EQUIV_NAMES + ["zzf"])
def test_visit_order_does_not_matter(name):
    ir = small_ir(name)
    icfg = build_icfg(ir)
    ctx = TaintContext.build(ir, icfg)
    n = len(ctx.flows)
    rev = list(reversed(range(n)))
    shuffled = list(range(n))
    random.Random(7).shuffle(shuffled)
    base, _, _, _ = fixpoint(ir, icfg, ctx=ctx)
    for order in (rev, shuffled):
        other, _, _, _ = fixpoint(ir, icfg, order=order, ctx=ctx)
        assert other == base


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(EQUIV_NAMES), st.randoms(use_true_random=False))
def test_any_permutation_gives_same_map(name, rnd):
    ir = small_ir(name)
    icfg = build_icfg(ir)
    ctx = TaintContext.build(ir, icfg)
    order = list(range(len(ctx.flows)))
    rnd.shuffle(order)
    assert fixpoint(ir, icfg, order=order, ctx=ctx)[0] == fixpoint(ir, icfg, ctx=ctx)[0]


def test_iteration_budget_warning():
    ir = lower(SMALL["loop_accumulate"])
    cfg = AnalysisConfig(max_iterations=1)
    res = analyze_taint(ir, build_icfg(ir), cfg)
    assert res.iterations == 1
    assert [w["code"] for w in res.warnings] == ["fixpoint-budget-exceeded"]


def test_path_cap_warning():
    ir = lower(SMALL["loop_accumulate"])
    res = analyze_taint(ir, build_icfg(ir), AnalysisConfig(max_paths_per_pair=1))
    assert res.capped_paths > 0
    assert "path-capped" in [w["code"] for w in res.warnings]
