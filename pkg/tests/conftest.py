import sys
from pathlib import Path

import pytest

from qrngsim.bitcore import BitStream, RngEngine

sys.path.insert(0, str(Path(__file__).parent))


def iid_stream(seed, n, p=0.5):
    rng = RngEngine(seed)
    bits = rng.fair_bits(n) if p == 0.5 else rng.bernoulli_bits(n, p)
    return BitStream.from_bits(bits, origin="simulated")


@pytest.fixture(scope="session")
def fair_1m():
    return iid_stream(1234, 10**6)


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"criterion {number:>2} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
