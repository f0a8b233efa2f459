import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flashscan.config import AnalysisConfig  # noqa: E402
from flashscan.frontend import parse_source  # noqa: E402
from flashscan.ir import build_icfg, lower_unit  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def lower(src: str, name: str | None = None):
    irs = lower_unit(parse_source(src, "<test>"), src)
    if name is None:
        return irs[-1]
    return next(ir for ir in irs if ir.name == name)


def fixture_ir(name: str):
    text = (FIXTURES / name).read_text()
    return lower_unit(parse_source(text, str(FIXTURES / name)), text)[0]


@pytest.fixture
def zzf():
    return fixture_ir("zzf.sol")


@pytest.fixture
def zzf_icfg(zzf):
    return build_icfg(zzf)


@pytest.fixture
def config():
    return AnalysisConfig()


# criterion name -> (passed, detail); filled by test_acceptance, printed at the end of the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
