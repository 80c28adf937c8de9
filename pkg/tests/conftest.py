import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import ipskernel as ik


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_report(request):
    return request.config.acceptance_lines

OU_SEED = 12
RATE_T_GRID = (250.0, 1000.0, 4000.0)
RATE_N_GRID = (8.0, 64.0, 512.0)
RATE_SEEDS = 20


@pytest.fixture(scope="session")
def ou_long_traj():
    """Reference run: harmonic confinement and interaction, sigma = 1,
    N = 500, T = 10000, invariant measure N(0, 1/2)."""
    cfg = ik.SimConfig(N=500, T=10000.0, h=0.01, sigma=1.0, seed=OU_SEED)
    return ik.simulate_ips(cfg, ik.Quadratic(1.0), ik.Quadratic(1.0))


def _timed_rate_study(vary, grid, fixed):
    runner = ik.GaussianTruthRunner(
        vary=vary,
        K=2,
        degree=1,
        moment_order=2,
        admissible=ik.Unconstrained(),
        **fixed,
    )
    t0 = time.time()
    results = ik.rate_study_multi(grid, runner, seeds=RATE_SEEDS, base_seed=2024)
    results["elapsed"] = time.time() - t0
    return results


@pytest.fixture(scope="session")
def ou_rate_results_T():
    """Errors vs horizon T at N = 500, 20 seeds (moment, basis, kernel)."""
    return _timed_rate_study("T", RATE_T_GRID, {"N": 500})


@pytest.fixture(scope="session")
def ou_rate_results_N():
    """Errors vs particle count N at T = 4000, 20 seeds."""
    return _timed_rate_study("N", RATE_N_GRID, {"T": 4000.0})
