from __future__ import annotations

import pytest

from gkplitho.lithography import codeword_pair
from gkplitho.spectral import momentum_wavefunction

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig2_pair():
    """Codewords |0~>, |1~> and record for alpha = 2.4, d = 20."""
    return codeword_pair(2.4, 20)


@pytest.fixture(scope="session")
def fig2_spectra(fig2_pair):
    phi0, phi1, _ = fig2_pair
    return momentum_wavefunction(phi0), momentum_wavefunction(phi1)
