import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def random_density(dim, support, rng, rank=3):
    """Random mixed state supported on the lowest ``support`` Fock levels."""
    vecs = rng.normal(size=(support, rank)) + 1j * rng.normal(size=(support, rank))
    rho_small = vecs @ vecs.conj().T
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:support, :support] = rho_small / np.trace(rho_small).real
    return rho


def random_unitary2(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
