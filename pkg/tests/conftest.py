import sys

import numpy as np
import pytest


def random_density(rng, d, rank=None):
    """Random full-rank (or given rank) density matrix."""
    rank = d if rank is None else rank
    x = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def random_operator(rng, d, support=None):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    if support is not None:
        x[support:, :] = 0
        x[:, support:] = 0
    return x


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
