import functools

import numpy as np
import pytest

from parasdo.fixtures import elliptope_instance, get_fixture
from parasdo.intervals import classify_point
from parasdo.partition import PartitionApprox, find_mu_breve, limit_point

# name -> (passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


@functools.lru_cache(maxsize=None)
def ident(name, eps):
    return find_mu_breve(get_fixture(name).instance, eps)


@functools.lru_cache(maxsize=None)
def limit(name, eps):
    return limit_point(get_fixture(name).instance, eps, ident=ident(name, eps))


@functools.lru_cache(maxsize=None)
def diagnostics(name, eps):
    return classify_point(get_fixture(name).instance, eps)


def exact_partition(Q_B, Q_T, Q_N, eps=0.0):
    n = Q_B.shape[0]
    return PartitionApprox(Q_B, Q_T, Q_N, np.zeros(n), np.zeros(n), {}, 0.0, eps)


@pytest.fixture(scope="session")
def ell():
    return elliptope_instance()


@pytest.fixture(scope="session")
def ellfx():
    return get_fixture("elliptope3")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail}")
