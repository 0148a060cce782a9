import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_masked(rng, p, n, rho=0.7):
    """Random data with every variable observed at least twice."""
    from misscov import MaskedMatrix

    X = rng.standard_normal((p, n)) * rng.uniform(0.5, 3.0, size=(p, 1)) + rng.normal(size=(p, 1))
    while True:
        S = rng.random((p, n)) < rho
        if (S.sum(axis=1) >= 2).all():
            return MaskedMatrix(X, S)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
