"""Positive and negative fixtures for each sink rule."""

import pytest

from conftest import lower
from flashscan.ir import build_icfg
from flashscan.taint import analyze_taint

TOKEN = """
interface IERC20 {
    function transfer(address to, uint256 amount) external returns (bool);
}
"""

CASES = {
    # value transfer whose amount is tainted
    ("EtherTokenTransfer", True): TOKEN + """
contract P {
    IERC20 token;
    function pay(uint256 amt) external { token.transfer(msg.sender, amt); }
}""",
    # tainted recipient but constant amount: not a transfer sink
    ("EtherTokenTransfer", False): TOKEN + """
contract P {
    IERC20 token;
    function pay(address to) external { token.transfer(to, 100); }
}""",
    ("EtherTokenTransfer-ether", True): """
contract P {
    function pay(uint256 amt) external { payable(msg.sender).transfer(amt); }
}""",
    # private function writing a mapping, reached with tainted arguments
    ("InternalLedgerUpdate", True): """
contract P {
    mapping(address => uint256) shares;
    function credit(address who, uint256 amt) private { shares[who] = shares[who] + 1; }
    function join(uint256 amt) external { credit(msg.sender, amt); }
}""",
    # same call shape, but the callee writes no mapping
    ("InternalLedgerUpdate", False): """
contract P {
    uint256 counter;
    function bump(uint256 amt) private { counter = counter + 1; }
    function join(uint256 amt) external { bump(amt); }
}""",
    ("EconomicStateWrite", True): """
contract P {
    mapping(address => uint256) credit;
    function put(uint256 amt) external { credit[msg.sender] = amt; }
}""",
    # scalar state write is not an economic mapping write
    ("EconomicStateWrite", False): """
contract P {
    uint256 lastAmount;
    function put(uint256 amt) external { lastAmount = amt; }
}""",
}


def sink_kinds(src):
    ir = lower(src, "P")
    return {p.sink_kind for p in analyze_taint(ir, build_icfg(ir)).paths}


@pytest.mark.parametrize("rule,positive", sorted(CASES), ids=lambda v: str(v))
def test_sink_rule(rule, positive):
    kind = rule.split("-")[0]
    assert (kind in sink_kinds(CASES[(rule, positive)])) is positive


def test_transfer_outranks_ledger_update_at_one_instruction():
    src = """
contract P {
    mapping(address => uint256) bal;
    function _transfer(address from, address to, uint256 amt) private { bal[to] = bal[to] + amt; }
    function move(uint256 amt) external { _transfer(address(this), msg.sender, amt); }
}"""
    ir = lower(src, "P")
    paths = analyze_taint(ir, build_icfg(ir)).paths
    at_call = {p.sink_kind for p in paths if ir.instruction(p.sink[0]).kind == "InternalCall"}
    assert at_call == {"EtherTokenTransfer"}
