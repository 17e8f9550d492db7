import numpy as np
import pytest


def dense_oracle(g):
    """Gabor synthesis matrix built entry by entry, independent of the fast path."""
    g = np.asarray(g, dtype=complex)
    n = g.size
    psi = np.empty((n, n * n), dtype=complex)
    for k in range(n):
        for l in range(n):
            for q in range(n):
                psi[q, k * n + l] = np.exp(2j * np.pi * l * q / n) * g[(q + k) % n]
    return psi


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
