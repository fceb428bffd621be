from functools import lru_cache

import pytest

from duorep.hsiao import FiniteAbelianGroup, build_hsiao, build_sigma_n
from duorep.idempotents import auto_prime

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def sigma(n):
    return build_sigma_n(n)


@lru_cache(maxsize=None)
def hsiao(n, group):
    return build_hsiao(n, FiniteAbelianGroup.parse(group))


def with_prime(M):
    return M, auto_prime(M)


@pytest.fixture
def s2():
    return sigma(2)


@pytest.fixture
def s3():
    return sigma(3)


@pytest.fixture
def h22():
    return hsiao(2, "2")


@pytest.fixture
def h32():
    return hsiao(3, "2")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
