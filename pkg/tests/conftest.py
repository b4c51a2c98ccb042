import numpy as np
import pytest

from qrnorms.quotients import FiniteQuotient, ag_tower, sl2_family

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def ag2():
    return ag_tower(2)


@pytest.fixture(scope="session")
def sl2_small():
    return sl2_family([3, 5, 7])


def cycle_quotient(n: int) -> FiniteQuotient:
    """Z/n with a = +1 and b = identity."""
    return FiniteQuotient(0, np.array([(np.arange(n) + 1) % n, np.arange(n)]))


def random_quotient(rng, n: int, level: int = 0) -> FiniteQuotient:
    """Seeded transitive action of F_2 on n points (retry until transitive)."""
    while True:
        action = np.array([rng.permutation(n), rng.permutation(n)])
        try:
            return FiniteQuotient(level, action)
        except ValueError:
            continue


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n:2d}: {detail}")
