import time

import numpy as np
import pytest

from acwave.config import RunConfig
from acwave.critical_point_solvers import critical_sequence
from acwave.cross_section import CrossSectionGrid, dirichlet_eigenpairs
from acwave.pipeline import run_wave
from acwave.weighted_channel import ChannelGrid, WaveParameters


def pytest_configure(config):
    config._acceptance_lines = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])


@pytest.fixture
def criterion(request):
    """``record(number, name, ok, detail)`` logs one PASS/FAIL line."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        request.config._acceptance_lines[number] = line
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def cross4():
    return CrossSectionGrid.interval(4.0, 41)


@pytest.fixture(scope="session")
def psi1(cross4):
    return dirichlet_eigenpairs(cross4, 1)[0]


@pytest.fixture(scope="session")
def params06(psi1):
    return WaveParameters(0.6, psi1.eigenvalue)


@pytest.fixture(scope="session")
def half05(cross4):
    """Half cylinder ``[-40, 0]`` at axial spacing 0.05."""
    return ChannelGrid.with_spacing(-40.0, 0.0, 0.05, cross4)


@pytest.fixture(scope="session")
def sequence3(params06, half05, psi1):
    """Critical points ``k = 1, 2, 3`` at ``c = 0.6`` on the half cylinder (about 40 s)."""
    return critical_sequence(params06, half05, 3, psi1.eigenfunction)


@pytest.fixture(scope="session")
def default_run():
    """Default pipeline (interval 4, c = 0.6, spacing 0.025) with its wall time."""
    t0 = time.perf_counter()
    res = run_wave(RunConfig.from_dict({}))
    return res, time.perf_counter() - t0


@pytest.fixture(scope="session")
def coarse_run():
    """Same pipeline at axial spacing 0.05."""
    return run_wave(RunConfig.from_dict({"channel": {"spacing": 0.05}}))


@pytest.fixture
def rng():
    return np.random.default_rng(0)
