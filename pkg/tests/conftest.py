import numpy as np
import pytest

from wvlab.hilbert import OperatorMatrix, StateVector

ACCEPTANCE_RESULTS = {}


def random_amps(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def random_state(rng, dims):
    dims = tuple(dims)
    return StateVector(random_amps(rng, int(np.prod(dims))), dims)


def random_hermitian(rng, dims):
    n = int(np.prod(dims))
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return OperatorMatrix(a + a.conj().T, dims)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projector(rng, n, rank):
    u = random_unitary(rng, n)[:, :rank]
    return u @ u.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in ACCEPTANCE_RESULTS.items():
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
