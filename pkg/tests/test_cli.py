import json
from pathlib import Path

import numpy as np
import pytest

import ipskernel as ik
from ipskernel.cli import main
from ipskernel.orthopoly import basis_distance, basis_from_dict

from oracles import hermite_basis_coefficients


def _write_config(path: Path, cfg: dict) -> Path:
    path.write_text(json.dumps(cfg, indent=1))
    return path


def _ou_config(**overrides) -> dict:
    cfg = {
        "simulation": {"N": 500, "T": 10000.0, "h": 0.01, "sigma": 1.0, "seed": 1},
        "confining": {"family": "quadratic", "a": 1.0},
        "interaction": {"family": "quadratic", "a": 1.0},
        "estimation": {"K": 2, "admissible": {"kind": "unconstrained"}},
    }
    for key, value in overrides.items():
        cfg[key] = value
    return cfg


@pytest.fixture(scope="session")
def ou_cli_run(tmp_path_factory):
    """One full-size reference run: simulate writes 10^6 + 1 rows."""
    root = tmp_path_factory.mktemp("ou_cli")
    config = _write_config(root / "config.json", _ou_config())
    out = root / "run"
    assert main(["simulate", "--config", str(config), "--out", str(out)]) == 0
    return out


def test_simulate_row_count(ou_cli_run):
    with open(ou_cli_run / "trajectory.csv") as fh:
        n_lines = sum(1 for _ in fh)
    assert n_lines == 10**6 + 2  # header + T/h + 1 samples
    meta = json.loads((ou_cli_run / "trajectory_meta.json").read_text())
    assert meta["N"] == 500 and meta["h"] == 0.01


def test_estimate_ou_and_k_degradation(ou_cli_run, tmp_path):
    traj = str(ou_cli_run / "trajectory.csv")
    conditions = {}
    for K in (2, 8):
        config = _write_config(
            tmp_path / f"config_k{K}.json",
            _ou_config(estimation={"K": K, "admissible": {"kind": "unconstrained"}}),
        )
        out = tmp_path / f"est_k{K}"
        code = main(["estimate", "--config", str(config), "--trajectory", traj,
                     "--out", str(out)])
        assert code == 0
        est = json.loads((out / "estimate.json").read_text())
        system = json.loads((out / "system.json").read_text())
        conditions[K] = system["condition_estimate"]
        if K == 2:
            assert abs(est["beta_hat"][1] - 0.7071) <= 0.05
            for name in ("moments.json", "basis.json", "system.json",
                         "estimate.json", "kernel_curve.csv"):
                assert (out / name).exists()
    assert conditions[8] > conditions[2]


def test_single_diffusion_run(tmp_path):
    cfg = _ou_config()
    cfg["simulation"].update(N=1, T=10.0)
    cfg["interaction"] = {"family": "zero"}
    config = _write_config(tmp_path / "c.json", cfg)
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")]) == 0


def test_non_integer_step_count_exits_2(tmp_path, capsys):
    cfg = _ou_config()
    cfg["simulation"].update(T=10.005)
    config = _write_config(tmp_path / "c.json", cfg)
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_keys_exit_2(tmp_path):
    cfg = _ou_config()
    cfg["typo_section"] = {}
    config = _write_config(tmp_path / "c.json", cfg)
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")]) == 2
    cfg = _ou_config()
    cfg["simulation"]["stride"] = 4
    config = _write_config(tmp_path / "c2.json", cfg)
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")]) == 2


def test_missing_trajectory_exits_2(tmp_path):
    config = _write_config(tmp_path / "c.json", _ou_config())
    assert main(["estimate", "--config", str(config),
                 "--trajectory", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "o")]) == 2


def test_incomplete_sections_exit_2(tmp_path):
    rows = "\n".join(f"{0.01 * i},{(-1) ** i}" for i in range(64))
    (tmp_path / "tiny.csv").write_text("t,x\n" + rows + "\n")
    traj = str(tmp_path / "tiny.csv")
    no_delta = _ou_config(
        estimation={"K": 2, "observation": {"mode": "discrete"}}
    )
    config = _write_config(tmp_path / "nodelta.json", no_delta)
    assert main(["estimate", "--config", str(config), "--trajectory", traj,
                 "--out", str(tmp_path / "o1")]) == 2
    no_bounds = _ou_config(estimation={"K": 2, "admissible": {"kind": "box"}})
    config = _write_config(tmp_path / "nobounds.json", no_bounds)
    assert main(["estimate", "--config", str(config), "--trajectory", traj,
                 "--out", str(tmp_path / "o2")]) == 2


def test_degenerate_trajectory_exits_4(tmp_path, capsys):
    rows = "\n".join(f"{0.01 * i},1.0" for i in range(400))
    (tmp_path / "flat.csv").write_text("t,x\n" + rows + "\n")
    config = _write_config(tmp_path / "c.json", _ou_config())
    code = main(["estimate", "--config", str(config),
                 "--trajectory", str(tmp_path / "flat.csv"),
                 "--out", str(tmp_path / "o")])
    assert code == 4
    assert "reduce K" in capsys.readouterr().err


def test_blowup_exits_3(tmp_path, capsys):
    cfg = _ou_config(confining={"family": "quadratic", "a": -5.0})
    cfg["simulation"].update(N=2, T=50.0, init={"kind": "deterministic", "x0": 1.0})
    config = _write_config(tmp_path / "c.json", cfg)
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")]) == 3
    assert "blew up" in capsys.readouterr().err


def test_singular_system_exits_5(tmp_path, monkeypatch, ou_cli_run):
    import ipskernel.cli as cli_mod

    def boom(*args, **kwargs):
        raise ik.SingularSystem("injected")

    monkeypatch.setattr(cli_mod, "estimate_from_trajectory", boom)
    config = _write_config(tmp_path / "c.json", _ou_config())
    code = main(["estimate", "--config", str(config),
                 "--trajectory", str(ou_cli_run / "trajectory.csv"),
                 "--out", str(tmp_path / "o")])
    assert code == 5


def test_basis_analytic_matches_hermite(tmp_path):
    cfg = _ou_config(estimation={"K": 4})
    config = _write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "basis"
    code = main(["basis", "--config", str(config), "--analytic", "gaussian:0,0.5",
                 "--out", str(out)])
    assert code == 0
    basis = basis_from_dict(json.loads((out / "basis.json").read_text()))
    for k in range(5):
        np.testing.assert_allclose(
            basis.coefficients(k), hermite_basis_coefficients(k), atol=1e-10
        )
    samples = np.loadtxt(out / "basis_samples.csv", delimiter=",", skiprows=1)
    assert samples.shape[1] == 6  # x plus psi_0..psi_4


def test_basis_constant_when_k_zero(tmp_path):
    cfg = _ou_config(estimation={"K": 0})
    config = _write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "basis0"
    assert main(["basis", "--config", str(config), "--analytic", "gaussian:0,0.5",
                 "--out", str(out)]) == 0
    basis = basis_from_dict(json.loads((out / "basis.json").read_text()))
    assert basis.K == 0
    assert basis.eval(0, 1.7) == pytest.approx(1.0)


def test_basis_empirical_small_system_is_worse(ou_cli_run, tmp_path):
    small = _ou_config()
    small["simulation"].update(N=5, seed=2)
    small["estimation"] = {"K": 4}
    config_small = _write_config(tmp_path / "small.json", small)
    out_small = tmp_path / "run_small"
    assert main(["simulate", "--config", str(config_small), "--out", str(out_small)]) == 0

    distances = {}
    for label, traj_dir in (("N5", out_small), ("N500", ou_cli_run)):
        cfg = _ou_config(estimation={"K": 4})
        config = _write_config(tmp_path / f"basis_{label}.json", cfg)
        out = tmp_path / f"basis_out_{label}"
        assert main(["basis", "--config", str(config),
                     "--trajectory", str(traj_dir / "trajectory.csv"),
                     "--out", str(out)]) == 0
        built = basis_from_dict(json.loads((out / "basis.json").read_text()))
        exact = ik.build_basis(ik.analytic_moments(ik.Gaussian(0.0, 0.5), 8), 4)
        quad = ik.ExactDensity(ik.Gaussian(0.0, 0.5))
        distances[label] = float(np.max(basis_distance(built, exact, quad)))
    assert distances["N5"] > distances["N500"]


def test_estimate_discrete_low_frequency(tmp_path):
    cfg = {
        "simulation": {"N": 50, "T": 500.0, "h": 0.01, "sigma": 1.0, "seed": 4},
        "confining": {"family": "quadratic", "a": 1.0},
        "interaction": {
            "family": "poly_cos",
            "coeffs": [0.0, 0.0, 0.5, -1.0 / 3.0, 0.25],
            "amplitude": 10.0,
        },
        "estimation": {
            "K": 4,
            "admissible": {"kind": "unconstrained"},
            "observation": {"mode": "discrete", "delta": 8.0},
            "curve_grid": {"lo": -3.0, "hi": 3.0, "points": 121},
        },
    }
    config = _write_config(tmp_path / "c.json", cfg)
    out_sim = tmp_path / "sim"
    assert main(["simulate", "--config", str(config), "--out", str(out_sim)]) == 0
    out_est = tmp_path / "est"
    assert main(["estimate", "--config", str(config),
                 "--trajectory", str(out_sim / "trajectory.csv"),
                 "--out", str(out_est)]) == 0
    curve = np.loadtxt(out_est / "kernel_curve.csv", delimiter=",", skiprows=1)
    assert curve[0, 0] == -3.0 and curve[-1, 0] == 3.0
    assert curve.shape == (121, 3)  # x, estimate, known truth


def test_convergence_self_test_modes(tmp_path):
    for mode, expected in (("inverse_sqrt", -0.5), ("constant", 0.0)):
        cfg = _ou_config(
            convergence={"grid": [100.0, 400.0, 1600.0], "seeds": 3, "self_test": mode}
        )
        config = _write_config(tmp_path / f"c_{mode}.json", cfg)
        out = tmp_path / f"conv_{mode}"
        assert main(["convergence", "--config", str(config), "--out", str(out)]) == 0
        summary = json.loads((out / "rate.json").read_text())
        assert summary[mode]["slope"] == pytest.approx(expected, abs=1e-12)
        assert (out / f"rate_{mode}.csv").exists()


def test_convergence_ou_horizon_slope(tmp_path):
    cfg = _ou_config(
        convergence={
            "vary": "T",
            "grid": [50.0, 400.0, 3200.0],
            "seeds": 16,
            "estimands": ["basis_error"],
            "degree": 1,
            "truth": {"mean": 0.0, "var": 0.5},
        }
    )
    config = _write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "conv"
    assert main(["convergence", "--config", str(config), "--out", str(out)]) == 0
    summary = json.loads((out / "rate.json").read_text())
    assert -0.7 <= summary["basis_error"]["slope"] <= -0.3
    csv = np.loadtxt(out / "rate_basis_error.csv", delimiter=",", skiprows=1)
    assert csv.shape == (3, 4)
    assert np.all(csv[:, 3] == 16)


def test_convergence_particle_grid_monotone(tmp_path):
    cfg = _ou_config(
        convergence={
            "vary": "N",
            "grid": [5.0, 50.0, 500.0],
            "seeds": 2,
            "estimands": ["basis_error"],
            "degree": 1,
            "truth": {"mean": 0.0, "var": 0.5},
        }
    )
    cfg["simulation"].update(T=10000.0)
    config = _write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "conv"
    assert main(["convergence", "--config", str(config), "--out", str(out)]) == 0
    summary = json.loads((out / "rate.json").read_text())
    errors = summary["basis_error"]["mean_errors"]
    assert errors[0] > errors[1] > errors[2]


def test_outputs_are_byte_identical(ou_cli_run, tmp_path):
    config = _write_config(tmp_path / "c.json", _ou_config())
    outs = []
    for name in ("rep1", "rep2"):
        out = tmp_path / name
        assert main(["estimate", "--config", str(config),
                     "--trajectory", str(ou_cli_run / "trajectory.csv"),
                     "--out", str(out)]) == 0
        outs.append(out)
    for fname in ("moments.json", "basis.json", "system.json", "estimate.json",
                  "kernel_curve.csv"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()

    cfg_small = _ou_config()
    cfg_small["simulation"].update(N=3, T=5.0)
    config_small = _write_config(tmp_path / "small.json", cfg_small)
    sims = []
    for name in ("sim1", "sim2"):
        out = tmp_path / name
        assert main(["simulate", "--config", str(config_small), "--out", str(out)]) == 0
        sims.append((out / "trajectory.csv").read_bytes())
    assert sims[0] == sims[1]


def test_seed_override_changes_trajectory(tmp_path):
    cfg = _ou_config()
    cfg["simulation"].update(N=3, T=5.0)
    config = _write_config(tmp_path / "c.json", cfg)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(config), "--out", str(out_a)]) == 0
    assert main(["simulate", "--config", str(config), "--seed", "77",
                 "--out", str(out_b)]) == 0
    assert (out_a / "trajectory.csv").read_bytes() != (out_b / "trajectory.csv").read_bytes()
