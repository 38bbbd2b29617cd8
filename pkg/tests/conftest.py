import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("PSFWSN_HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_psd(rng, n, rank=None):
    """Random complex Hermitian PSD matrix of the given rank."""
    r = n if rank is None else rank
    G = rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r))
    B = G @ G.conj().T
    return 0.5 * (B + B.conj().T)


def same_up_to_phase(a, b, atol):
    """True when ``a = exp(j phi) b`` for some ``phi``."""
    r = np.asarray(a) * np.conj(np.asarray(b))
    r0 = r[np.argmax(np.abs(r))]
    return np.allclose(r * np.conj(r0) / abs(r0), np.abs(r), atol=atol)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
