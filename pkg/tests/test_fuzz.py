"""parse_source totality on random and mutated inputs."""

import random

from conftest import FIXTURES
from flashscan.frontend import SourceUnit, parse_source
from flashscan.ir import lower_unit

SEEDS = [p.read_bytes() for p in sorted(FIXTURES.glob("*.sol"))]
ALPHABET = b"contract function { } ( ) ; = + - * / [ ] mapping => uint256 if else for while return require _ . , 0x1f \"'\n\t"


def fuzz_inputs(n, seed=1234):
    rnd = random.Random(seed)
    for k in range(n):
        mode = k % 4
        if mode == 0:
            yield bytes(rnd.randrange(256) for _ in range(rnd.randrange(0, 200)))
        elif mode == 1:
            yield bytes(rnd.choice(ALPHABET) for _ in range(rnd.randrange(0, 300)))
        else:
            base = bytearray(rnd.choice(SEEDS))
            for _ in range(rnd.randrange(1, 6)):
                i = rnd.randrange(len(base))
                op = rnd.randrange(3)
                if op == 0:
                    del base[i:i + rnd.randrange(1, 20)]
                elif op == 1:
                    base[i:i] = bytes([rnd.randrange(256)])
                else:
                    j = rnd.randrange(len(base))
                    base[i:i] = base[j:j + rnd.randrange(1, 30)]
            yield bytes(base)


def test_parse_never_aborts_on_ten_thousand_inputs():
    count = 0
    for data in fuzz_inputs(10_000):
        unit = parse_source(data, "<fuzz>")
        assert isinstance(unit, SourceUnit)
        assert isinstance(unit.diagnostics, list)
        count += 1
    assert count == 10_000


def test_lowering_survives_mutated_sources():
    for data in fuzz_inputs(400, seed=99):
        unit = parse_source(data, "<fuzz>")
        lower_unit(unit, data.decode("utf-8", errors="replace"))
