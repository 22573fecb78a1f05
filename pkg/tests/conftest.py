import numpy as np
import pytest

from kerrchord.core import CoherentParams, Constants
from kerrchord.quantum import coherent_fock, kerr_propagate

T1 = 0.013
T2 = 0.071
T3 = np.pi / 20
T4 = np.pi / 8

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


@pytest.fixture(scope="session")
def params():
    return CoherentParams(alpha_q=4.0, alpha_p=3.0)


@pytest.fixture(scope="session")
def hbar1():
    return Constants(hbar=1.0)


@pytest.fixture(scope="session")
def state0(params):
    return coherent_fock(params)


@pytest.fixture(scope="session")
def state_t1(state0):
    return kerr_propagate(state0, T1)


@pytest.fixture(scope="session")
def state_t2(state0):
    return kerr_propagate(state0, T2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
