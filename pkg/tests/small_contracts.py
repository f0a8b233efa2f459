"""Small contracts used by the oracle-equivalence and fixpoint-property tests."""

SMALL = {
    "straight_line": """
contract A {
    mapping(address => uint256) bal;
    function f(uint256 x) external {
        uint256 y = x + 1;
        uint256 z = y * 2;
        bal[msg.sender] = z;
    }
}""",
    "branch_join": """
contract B {
    mapping(address => uint256) bal;
    function f(uint256 x, uint256 y) external {
        uint256 v = 0;
        if (x > 10) {
            v = y;
        } else {
            v = 3;
        }
        bal[msg.sender] = v;
    }
}""",
    "loop_accumulate": """
contract C {
    mapping(address => uint256) bal;
    function f(uint256 n) external {
        uint256 acc = 0;
        for (uint256 i = 0; i < n; i++) {
            acc = acc + i;
        }
        bal[msg.sender] = acc;
    }
}""",
    "storage_roundtrip": """
contract D {
    uint256 total;
    mapping(address => uint256) credit;
    function put(uint256 x) external {
        total = total + x;
    }
    function take() external {
        credit[msg.sender] = total;
    }
}""",
    "internal_call_return": """
contract E {
    mapping(address => uint256) bal;
    function double(uint256 a) internal pure returns (uint256) {
        return a * 2;
    }
    function f(uint256 x) external {
        bal[msg.sender] = double(x);
    }
}""",
    "ledger_update": """
contract F {
    mapping(address => uint256) shares;
    function credit(address who, uint256 amt) private {
        shares[who] = shares[who] + amt;
    }
    function deposit(uint256 amt) external {
        credit(msg.sender, amt);
    }
}""",
    "dex_price_transfer": """
interface IRouter {
    function getAmountsOut(uint256 a, address[] calldata p) external view returns (uint256[] memory);
}
interface IERC20 {
    function transfer(address to, uint256 amount) external returns (bool);
}
contract G {
    IRouter router;
    IERC20 token;
    function f(uint256 a, address[] calldata p) external {
        uint256[] memory out = router.getAmountsOut(a, p);
        token.transfer(msg.sender, out[1]);
    }
}""",
    "oracle_view_mul": """
interface IFeed {
    function price() external view returns (uint256);
}
contract H {
    IFeed feed;
    mapping(address => uint256) debt;
    function borrow(uint256 amt) external {
        uint256 p = feed.price();
        debt[msg.sender] = amt * p / 1e18;
    }
}""",
    "implicit_guard": """
contract I {
    mapping(address => uint256) bal;
    function f(uint256 x) external {
        if (x > 5) {
            bal[msg.sender] = 1;
        }
    }
}""",
    "msg_value_payout": """
contract J {
    uint256 rate;
    function buy() external payable {
        uint256 owed = msg.value * rate;
        payable(msg.sender).transfer(owed);
    }
}""",
    "modifier_inlined": """
contract K {
    address owner;
    mapping(address => uint256) bal;
    modifier onlyOwner() {
        require(msg.sender == owner);
        _;
    }
    function set(address who, uint256 v) external onlyOwner {
        bal[who] = v;
    }
}""",
    "while_with_break": """
contract L {
    mapping(address => uint256) bal;
    function f(uint256 n, uint256 cap) external {
        uint256 i = 0;
        while (i < n) {
            if (i > cap) {
                break;
            }
            i = i + 1;
        }
        bal[msg.sender] = i;
    }
}""",
}
