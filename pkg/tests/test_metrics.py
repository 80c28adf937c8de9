import numpy as np
import pytest

import ipskernel as ik
from ipskernel.metrics import rate_study, rate_study_multi

from oracles import gaussian_moment_direct


HALF = ik.Gaussian(0.0, 0.5)


def test_norm_of_constant_is_one():
    quad = ik.ExactDensity(HALF)
    assert ik.l2_rho_norm(lambda x: np.ones_like(x), quad) == pytest.approx(1.0, abs=1e-8)


def test_norm_of_identity():
    quad = ik.ExactDensity(HALF)
    assert ik.l2_rho_norm(lambda x: x, quad) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-8)


def test_norm_of_orthonormal_polynomial():
    basis = ik.build_basis(ik.analytic_moments(HALF, 8), 4)
    quad = ik.ExactDensity(HALF)
    assert ik.l2_rho_norm(lambda x: basis.eval(2, x), quad) == pytest.approx(1.0, abs=1e-8)


def test_simpson_integrates_high_moments():
    quad = ik.ExactDensity(HALF)
    for r in range(13):
        exact = gaussian_moment_direct(0.0, 0.5, r)
        got = quad.integrate(lambda x: x**r)
        if exact == 0.0:
            assert abs(got) <= 1e-10
        else:
            assert abs(got - exact) <= 1e-8 * abs(exact)


def test_empirical_measure_matches_exact_density():
    rng = np.random.default_rng(10)
    samples = rng.normal(scale=np.sqrt(0.5), size=100_000)
    basis = ik.build_basis(ik.analytic_moments(HALF, 4), 2)
    f = lambda x: basis.eval(1, x)
    emp = ik.EmpiricalMeasure(samples).norm(f)
    exact = ik.ExactDensity(HALF).norm(f)
    # se of the squared norm is std(f^2)/sqrt(n); halve for the sqrt
    fx2 = basis.eval(1, samples) ** 2
    se = fx2.std(ddof=1) / np.sqrt(samples.size) / (2.0 * exact)
    assert abs(emp - exact) <= 3.0 * se


def test_relative_error_and_interval_helpers():
    quad = ik.ExactDensity(HALF)
    est = lambda x: 1.1 * x
    truth = lambda x: x
    assert ik.relative_l2_error(est, truth, quad) == pytest.approx(0.1, abs=1e-8)
    samples = np.linspace(-1.0, 1.0, 2001)
    lo, hi = ik.central_mass_interval(samples, 0.95)
    assert lo == pytest.approx(-0.95, abs=1e-2)
    assert hi == pytest.approx(0.95, abs=1e-2)
    restricted = ik.EmpiricalMeasure(samples).restricted(lo, hi)
    assert restricted.samples.min() >= lo and restricted.samples.max() <= hi


def test_quadrature_validation():
    with pytest.raises(ik.InvalidQuadrature):
        ik.ExactDensity(HALF, nodes=10)
    with pytest.raises(ik.InvalidQuadrature):
        ik.ExactDensity(ik.Gaussian(0.0, -1.0))
    with pytest.raises(ik.InvalidQuadrature):
        ik.EmpiricalMeasure(np.array([]))


def test_rate_study_constant_error_slope_zero():
    res = rate_study([10.0, 100.0, 1000.0], lambda g, s: 1.0, seeds=3)
    assert abs(res.slope) <= 1e-12
    np.testing.assert_array_equal(res.n_seeds, [3, 3, 3])


def test_rate_study_exact_power_law():
    res = rate_study([10.0, 100.0, 1000.0], lambda g, s: 1.0 / np.sqrt(g), seeds=2)
    assert res.slope == pytest.approx(-0.5, abs=1e-12)
    assert res.slope_stderr <= 1e-12


def test_rate_study_deterministic():
    def runner(g, seed):
        return 1.0 / np.sqrt(g) * (1.0 + 0.01 * ((seed % 97) / 97.0))

    a = rate_study([10.0, 100.0, 1000.0], runner, seeds=5, base_seed=3)
    b = rate_study([10.0, 100.0, 1000.0], runner, seeds=5, base_seed=3)
    np.testing.assert_array_equal(a.mean_errors, b.mean_errors)
    assert a.slope == b.slope


def test_rate_study_partial_and_total_failures():
    def flaky(g, seed):
        if seed % 2 == 0:
            raise ik.EmptyTrajectory("injected")
        return 1.0 / g

    res = rate_study([10.0, 100.0, 1000.0], flaky, seeds=8, base_seed=1)
    assert np.all(res.n_seeds >= 1)
    assert np.any(res.n_seeds < 8)

    def broken(g, seed):
        raise ik.EmptyTrajectory("always")

    with pytest.raises(ik.RateStudyError):
        rate_study([10.0, 100.0, 1000.0], broken, seeds=2)


def test_rate_study_grid_validation():
    with pytest.raises(ik.InvalidQuadrature):
        rate_study([10.0, 5.0, 1.0], lambda g, s: 1.0, seeds=1)
    with pytest.raises(ik.InvalidQuadrature):
        rate_study([10.0, 20.0], lambda g, s: 1.0, seeds=1)


def test_gaussian_truth_runner_small_cell():
    runner = ik.GaussianTruthRunner(vary="T", N=20, K=2, degree=1)
    out = runner(50.0, seed=123)
    assert set(out) == {"moment_error", "basis_error", "kernel_error"}
    assert all(np.isfinite(v) and v >= 0.0 for v in out.values())


class _PowerRunner:
    """Module-level so worker processes can unpickle it."""

    def __call__(self, g, seed):
        return (1.0 + 1e-3 * (seed % 11)) / np.sqrt(g)


def test_rate_study_parallel_cells_match_serial():
    grid = [10.0, 100.0, 1000.0]
    serial = rate_study(grid, _PowerRunner(), seeds=4, base_seed=5, n_jobs=1)
    parallel = rate_study(grid, _PowerRunner(), seeds=4, base_seed=5, n_jobs=2)
    np.testing.assert_array_equal(serial.mean_errors, parallel.mean_errors)
    assert serial.slope == parallel.slope


def test_rate_study_multi_shares_cells():
    calls = []

    class Runner:
        def __call__(self, g, seed):
            calls.append((g, seed))
            return {"a": 1.0 / g, "b": 2.0 / g}

    res = rate_study_multi([10.0, 100.0, 1000.0], Runner(), seeds=2)
    assert len(calls) == 6
    assert res["a"].slope == pytest.approx(-1.0, abs=1e-12)
    assert res["b"].slope == pytest.approx(-1.0, abs=1e-12)
