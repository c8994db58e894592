import numpy as np
import pytest

from periodic_wave import (
    WaveSpace,
    boundary_transform,
    build_spectrum,
    eigensolve,
    exponential,
    make_period,
    spectral_constants,
)

P = 0.5
MU = 2.5


class Setup:
    """Exponential coefficient c=1, Dirichlet ends, period 2 pi, mu=2.5."""

    def __init__(self, j_max=16, k_max=16, n=512, mu=MU, n_t=None):
        self.coeff = exponential(1.0)
        self.bc = boundary_transform(1, 0, 1, 0, self.coeff)
        self.consts = spectral_constants(self.coeff, self.bc)
        self.basis = eigensolve(self.coeff, self.bc, k_max, n)
        self.table = build_spectrum(self.basis, make_period(1, 1), mu, j_max, self.consts)
        self.space = WaveSpace(self.basis, self.table, n_t=n_t)
        self.p = P


@pytest.fixture(scope="session")
def standard():
    return Setup()


@pytest.fixture(scope="session")
def small():
    return Setup(j_max=6, k_max=6, n=128)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
