"""Analysis configuration shared by the taint, checker and reasoning stages.

List overrides replace the defaults wholesale; nothing is appended.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

DEFAULT_DEX_FUNCTIONS = (
    "getAmountsOut", "getAmountsIn", "getAmountOut", "getAmountIn",
    "getReserves", "quote", "latestAnswer", "latestRoundData",
)

# callee name -> (recipient argument index, amount argument index)
DEFAULT_TRANSFER_FUNCTIONS = {
    "transfer": (0, 1),
    "transferFrom": (1, 2),
    "safeTransfer": (0, 1),
    "safeTransferFrom": (1, 2),
    "_transfer": (1, 2),
    "mint": (0, 1),
}

DEFAULT_PRIVILEGED_MODIFIERS = (
    "onlyOwner", "onlyAdmin", "onlyGovernance", "onlyRole", "onlyOperator",
    "auth", "authorized",
)

DEFAULT_BALANCE_NAMES = ("balance", "balances", "_balances", "balanceOf")

DEFAULT_ROUTER_FUNCTIONS = (
    "swapExactTokensForTokens",
    "swapExactTokensForETH",
    "swapExactETHForTokens",
    "swapTokensForExactTokens",
    "swapTokensForExactETH",
    "swapETHForExactTokens",
    "swapExactTokensForTokensSupportingFeeOnTransferTokens",
    "swapExactTokensForETHSupportingFeeOnTransferTokens",
    "swapExactETHForTokensSupportingFeeOnTransferTokens",
    "addLiquidity",
    "addLiquidityETH",
)

ARITHMETIC_WRAPPERS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


@dataclass
class AnalysisConfig:
    dex_functions: tuple[str, ...] = DEFAULT_DEX_FUNCTIONS
    transfer_functions: dict[str, tuple[int, int]] = field(default_factory=lambda: dict(DEFAULT_TRANSFER_FUNCTIONS))
    privileged_modifiers: tuple[str, ...] = DEFAULT_PRIVILEGED_MODIFIERS
    balance_names: tuple[str, ...] = DEFAULT_BALANCE_NAMES
    router_functions: tuple[str, ...] = DEFAULT_ROUTER_FUNCTIONS
    tx_sources: tuple[str, ...] = ("msg.data", "msg.value")
    max_iterations: int = 10_000
    max_paths_per_pair: int = 256
    # per (carrier, source) bound on distinct provenance chains; a termination guardrail
    max_labels_per_source: int = 256
    max_provenance_repeats: int = 2

    def to_json(self) -> dict:
        out = asdict(self)
        out["transfer_functions"] = {k: list(v) for k, v in sorted(self.transfer_functions.items())}
        for f in fields(self):
            if isinstance(out[f.name], tuple):
                out[f.name] = list(out[f.name])
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "AnalysisConfig":
        kwargs = {}
        names = {f.name for f in fields(cls)}
        for key, value in doc.items():
            if key not in names:
                raise ValueError(f"unknown configuration key {key!r}")
            if key == "transfer_functions":
                value = {k: (int(v[0]), int(v[1])) for k, v in value.items()}
            elif isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        return cls(**kwargs)
