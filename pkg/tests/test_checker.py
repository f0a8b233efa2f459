import pytest

from conftest import FIXTURES, fixture_ir, lower
from flashscan.checker import (
    apply_checker, check_fee_on_transfer, check_privilege, check_temporal,
)
from flashscan.config import AnalysisConfig
from flashscan.grouping import group_paths
from flashscan.ir import build_icfg
from flashscan.taint import analyze_taint


def groups_of(ir):
    return group_paths(analyze_taint(ir, build_icfg(ir)).paths)


def outcomes(ir):
    return apply_checker(ir, groups_of(ir))


def rep(ir):
    return groups_of(ir)[-1].representative


def test_original_zzf_not_suppressed(zzf):
    outs = outcomes(zzf)
    assert outs and not any(o.suppressed for o in outs)
    assert all(o.defenses == [] for o in outs)


@pytest.mark.parametrize("fixture,kind", [
    ("zzf_only_owner.sol", "Privilege"),
    ("zzf_cooldown.sol", "Temporal"),
    ("zzf_fee_on_transfer.sol", "FeeOnTransfer"),
])
def test_mutated_fixture_suppressed(fixture, kind):
    ir = fixture_ir(fixture)
    outs = outcomes(ir)
    assert outs and all(o.suppressed for o in outs)
    assert all(any(d.kind == kind for d in o.defenses) for o in outs)


def test_cooldown_fixture_uses_literal_shape():
    assert "require(block.timestamp >= lastActionTime + cooldownPeriod);" in (FIXTURES / "zzf_cooldown.sol").read_text()


def test_evidence_points_at_real_locations():
    for name in ("zzf_only_owner.sol", "zzf_cooldown.sol", "zzf_fee_on_transfer.sol"):
        ir = fixture_ir(name)
        ids = {str(i.id) for i in ir.instructions()}
        mods = {m.name for f in ir.functions for m in f.modifiers}
        fns = {f.name for f in ir.functions}
        for o in outcomes(ir):
            for d in o.defenses:
                assert d.location in ids | mods | fns
                assert d.evidence


def test_privilege_modifier_finding():
    ir = fixture_ir("zzf_only_owner.sol")
    found = check_privilege(ir, rep(ir))
    assert any(d.location == "onlyOwner" for d in found)


def test_no_guards_no_privilege(zzf):
    assert check_privilege(zzf, rep(zzf)) == []


GUARDED = """
contract W {
    address owner;
    mapping(address => bool) whitelisted;
    mapping(address => uint256) bal;
    function f(uint256 x) external {
        %s
        bal[msg.sender] = x;
    }
}"""


@pytest.mark.parametrize("guard,hit", [
    ("require(msg.sender == owner || whitelisted[msg.sender]);", True),
    ("require(owner == msg.sender);", True),
    ("if (msg.sender != owner) revert();", True),
    ("require(x > 0);", False),
])
def test_sender_guard_shapes(guard, hit):
    ir = lower(GUARDED % guard)
    assert bool(check_privilege(ir, rep(ir))) is hit


TIMED = """
contract T {
    uint256 lastTrade;
    uint256 delay;
    mapping(address => uint256) bal;
    function f(uint256 x) external {
        %s
        bal[msg.sender] = x;
    }
}"""


@pytest.mark.parametrize("guard,hit", [
    ("require(block.timestamp >= lastTrade + delay);", True),
    ("require(block.timestamp > lastTrade + 60);", True),
    ("if (block.timestamp < lastTrade + delay) revert();", True),
    ("require(block.timestamp - lastTrade >= delay);", True),
    ("require(block.timestamp > 0);", False),
    ("require(x >= lastTrade + delay);", False),
])
def test_temporal_shapes(guard, hit):
    ir = lower(TIMED % guard)
    assert bool(check_temporal(ir, rep(ir))) is hit


FEE = """
interface IRouter {
    function %s(uint256 a, uint256 b, address[] calldata p, address to, uint256 d) external;
}
contract Fee {
    IRouter router;
    mapping(address => uint256) _balances;
    address[] route;
    function _transfer(address from, address to, uint256 amt) internal {
        %s
    }
    function send(address to, uint256 amt) external {
        _transfer(msg.sender, to, amt);
    }
}"""
EFFECTS = "_balances[from] = _balances[from] - amt;\n        _balances[to] = _balances[to] + amt;"
SWAP = "router.%s(amt / 100, 0, route, address(this), block.timestamp);"


@pytest.mark.parametrize("callee,body,hit", [
    ("swapExactTokensForETHSupportingFeeOnTransferTokens", EFFECTS + "\n        " + SWAP, True),
    ("swapExactTokensForETHSupportingFeeOnTransferTokens", SWAP + "\n        " + EFFECTS, False),
    ("mysteryHook", EFFECTS + "\n        " + SWAP, False),
])
def test_fee_on_transfer_ordering(callee, body, hit):
    ir = lower(FEE % (callee, body % callee if "%s" in body else body))
    found = [d for g in groups_of(ir) for d in check_fee_on_transfer(ir, g.representative)]
    assert bool(found) is hit


def test_adding_owner_modifier_never_unsuppresses():
    base = (FIXTURES / "zzf_cooldown.sol").read_text()
    guarded = base.replace(
        "mapping(address => uint256) public burnAmount;",
        "mapping(address => uint256) public burnAmount;\n    address owner;\n"
        "    modifier onlyOwner() { require(msg.sender == owner); _; }",
    ).replace("external {", "external onlyOwner {", 1)
    before = {o.group_key: o.suppressed for o in outcomes(lower(base))}
    after = {o.group_key: o.suppressed for o in outcomes(lower(guarded))}
    for key, was in before.items():
        if was:
            assert after.get(key, True)


def test_empty_group_list(zzf):
    assert apply_checker(zzf, []) == []


def test_privileged_set_is_configurable():
    ir = fixture_ir("zzf_only_owner.sol")
    cfg = AnalysisConfig(privileged_modifiers=("onlyAdmin",))
    found = check_privilege(ir, rep(ir), cfg)
    assert all(d.location != "onlyOwner" for d in found)
