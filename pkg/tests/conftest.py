import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from turbolattice.convcode import RationalGeneratorMatrix
from turbolattice.gf2 import gf2_rank
from turbolattice.turbo import nested_family

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# three-input rate-3/4 code with shared feed-back 1 + x^2 + x^4
THREE_INPUT_CODE = "11011/10101\n10011/10101\n11101/10101"
# memory-2 recursive code [1, (1 + x^2)/(1 + x + x^2)]
GA_CODE = "101/111"
# two-input code with feed-back 1 + x^2 + x^3, numerators 1+x+x^2+x^3 and 1+x+x^2
TWO_INPUT_CODE = "1111/1011\n111/1011"

HAMMING_74 = np.array([
    [1, 0, 0, 0, 0, 1, 1],
    [0, 1, 0, 0, 1, 0, 1],
    [0, 0, 1, 0, 1, 1, 0],
    [0, 0, 0, 1, 1, 1, 1],
], dtype=np.uint8)

# circulant block for the first input of the three-input code at L = 8
F14_PRINTED = np.array([
    [0, 0, 1, 1, 0, 1, 1, 0],
    [0, 0, 0, 1, 1, 0, 1, 1],
    [1, 0, 0, 0, 1, 1, 0, 1],
    [1, 1, 0, 0, 0, 1, 1, 0],
    [0, 1, 1, 0, 0, 0, 1, 1],
    [1, 0, 1, 1, 0, 0, 0, 1],
    [1, 1, 0, 1, 1, 0, 0, 0],
    [0, 1, 1, 0, 1, 1, 0, 0],
], dtype=np.uint8)

ACCEPTANCE_LINES = []


def random_family(rng, n_max=12, a_max=2):
    n = int(rng.integers(2, n_max + 1))
    a = int(rng.integers(1, a_max + 1))
    while True:
        k1 = int(rng.integers(a, n + 1))
        G = rng.integers(0, 2, (k1, n), dtype=np.uint8)
        if gf2_rank(G) == k1:
            break
    chain = [k1]
    for _ in range(a - 1):
        chain.insert(0, int(rng.integers(1, chain[0])))
    return nested_family(G, tuple(chain))


@pytest.fixture
def ga():
    return RationalGeneratorMatrix.parse(GA_CODE)


@pytest.fixture
def three_input():
    return RationalGeneratorMatrix.parse(THREE_INPUT_CODE)


@pytest.fixture
def two_input():
    return RationalGeneratorMatrix.parse(TWO_INPUT_CODE)


@pytest.fixture
def hamming():
    return HAMMING_74.copy()


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def report(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
