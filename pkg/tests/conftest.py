import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from anttenna.geometry import C0, DipoleSpec, TorusSpec, discretize_dipole, discretize_torus


@pytest.fixture(scope="session")
def default_torus():
    return discretize_torus(TorusSpec())


@pytest.fixture(scope="session")
def half_wave_dipole():
    freq = 300e6
    lam = C0 / freq
    return discretize_dipole(DipoleSpec(0.5 * lam, 0.001 * lam, 81)), freq


@pytest.fixture(scope="session")
def default_sweep():
    """The 50-point default-torus band sweep and its wall time (s)."""
    import time

    from anttenna.sweep import SweepConfig, run_sweep

    t0 = time.perf_counter()
    result = run_sweep(TorusSpec(), SweepConfig())
    return result, time.perf_counter() - t0


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
