"""Static taint analysis plus staged reasoning for price-manipulation bugs in Solidity contracts."""

from .checker import CheckerOutcome, DefenseFinding, apply_checker
from .config import AnalysisConfig
from .errors import FlashscanError
from .pipeline import ContractAnalysis, analyze_ir, load_contracts
from .report import CorpusMetrics, Finding, build_report, compute_metrics

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "CheckerOutcome", "ContractAnalysis", "CorpusMetrics", "DefenseFinding",
    "Finding", "FlashscanError", "analyze_ir", "apply_checker", "build_report",
    "compute_metrics", "load_contracts",
]
