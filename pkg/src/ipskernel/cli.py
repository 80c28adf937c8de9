"""Command-line front end: simulate, basis, estimate, convergence.

Every command is driven by a single JSON config file; unknown keys are
rejected so typos in experiment sweeps fail loudly.  All randomness
flows from the config's seed, with per-command child seeds derived by
labeled hashing, and outputs are written with fixed float formatting so
reruns are byte-identical.

Exit codes: 0 ok, 2 config error, 3 simulation blow-up, 4 basis
construction failure, 5 singular system.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .errors import (
    HankelNotPositiveDefinite,
    InvalidConfig,
    IpsKernelError,
    NonFinitePosition,
    SingularSystem,
)
from .gmm import (
    Box,
    EuclideanBall,
    Unconstrained,
    estimate_from_trajectory,
)
from .metrics import GaussianTruthRunner, rate_study, rate_study_multi
from .moments import (
    Gaussian,
    analytic_moments,
    empirical_moments_continuous,
    moments_to_dict,
)
from .orthopoly import basis_to_dict, build_basis
from .potentials import potential_from_dict
from .simulate import (
    DeterministicInit,
    GaussianIIDInit,
    SimConfig,
    read_trajectory,
    simulate_ips,
    subsample,
    write_trajectory,
)

_TOP_KEYS = {"simulation", "confining", "interaction", "estimation", "convergence"}
_SIM_KEYS = {"N", "T", "h", "sigma", "seed", "init", "burn_in", "store_stride"}
_INIT_KEYS = {"kind", "x0", "mean", "var"}
_EST_KEYS = {"K", "sigma", "admissible", "observation", "curve_grid"}
_SIGMA_KEYS = {"source", "value"}
_ADM_KEYS = {"kind", "radius", "lower", "upper"}
_OBS_KEYS = {"mode", "delta"}
_GRID_KEYS = {"lo", "hi", "points"}
_CONV_KEYS = {
    "vary",
    "grid",
    "seeds",
    "estimands",
    "K",
    "degree",
    "moment_order",
    "truth",
    "true_kernel_coeffs",
    "self_test",
}
_TRUTH_KEYS = {"mean", "var"}


def _check_keys(d: dict, allowed: set, context: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise InvalidConfig(f"unknown {context} keys: {sorted(unknown)}")


def _child_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidConfig("config must be a JSON object")
    _check_keys(cfg, _TOP_KEYS, "config")
    return cfg


def _parse_init(d: dict):
    _check_keys(d, _INIT_KEYS, "init")
    kind = d.get("kind", "deterministic")
    if kind == "deterministic":
        return DeterministicInit(x0=float(d.get("x0", 0.0)))
    if kind == "gaussian":
        return GaussianIIDInit(mean=float(d.get("mean", 0.0)), var=float(d.get("var", 1.0)))
    raise InvalidConfig(f"unknown init kind {kind!r}")


def _parse_sim(cfg: dict, seed_override) -> SimConfig:
    if "simulation" not in cfg:
        raise InvalidConfig("config is missing the 'simulation' section")
    d = cfg["simulation"]
    _check_keys(d, _SIM_KEYS, "simulation")
    try:
        sim = SimConfig(
            N=int(d["N"]),
            T=float(d["T"]),
            h=float(d["h"]),
            sigma=float(d["sigma"]),
            seed=int(seed_override if seed_override is not None else d["seed"]),
            init=_parse_init(d.get("init", {})),
            burn_in=float(d.get("burn_in", 0.0)),
            store_stride=int(d.get("store_stride", 1)),
        )
    except KeyError as exc:
        raise InvalidConfig(f"simulation section is missing {exc}") from exc
    sim.validate()
    return sim


def _parse_potential(cfg: dict, key: str):
    if key not in cfg:
        raise InvalidConfig(f"config is missing the '{key}' section")
    try:
        return potential_from_dict(cfg[key])
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidConfig(f"bad {key} potential: {exc}") from exc


def _parse_admissible(d: dict):
    _check_keys(d, _ADM_KEYS, "admissible")
    kind = d.get("kind", "ball")
    if kind == "unconstrained":
        return Unconstrained()
    if kind == "ball":
        return EuclideanBall(radius=float(d.get("radius", 100.0)))
    if kind == "box":
        if "lower" not in d or "upper" not in d:
            raise InvalidConfig("box admissible set requires 'lower' and 'upper'")
        return Box(
            lower=np.asarray(d["lower"], dtype=float),
            upper=np.asarray(d["upper"], dtype=float),
        )
    raise InvalidConfig(f"unknown admissible kind {kind!r}")


def _parse_curve_grid(d: dict) -> np.ndarray:
    _check_keys(d, _GRID_KEYS, "curve_grid")
    lo = float(d.get("lo", -3.0))
    hi = float(d.get("hi", 3.0))
    points = int(d.get("points", 301))
    if not (hi > lo) or points < 2:
        raise InvalidConfig("curve_grid needs hi > lo and points >= 2")
    return np.linspace(lo, hi, points)


def _read_trajectory_with_sidecar(path):
    path = Path(path)
    sidecar = path.with_name(path.stem + "_meta.json")
    try:
        return read_trajectory(path, sidecar if sidecar.exists() else None)
    except OSError as exc:
        raise InvalidConfig(f"cannot read trajectory {path}: {exc}") from exc


def cmd_simulate(cfg: dict, out: Path, seed_override, threads: int) -> int:
    sim = _parse_sim(cfg, seed_override)
    sim = SimConfig(
        N=sim.N,
        T=sim.T,
        h=sim.h,
        sigma=sim.sigma,
        seed=_child_seed(sim.seed, "simulate"),
        init=sim.init,
        burn_in=sim.burn_in,
        store_stride=sim.store_stride,
    )
    confining = _parse_potential(cfg, "confining")
    interaction = _parse_potential(cfg, "interaction")
    traj = simulate_ips(sim, confining, interaction)
    write_trajectory(traj, out / "trajectory.csv", out / "trajectory_meta.json")
    print(f"wrote {out / 'trajectory.csv'} ({len(traj)} rows)")
    return 0


def _pipeline_from_config(cfg: dict, traj):
    if "estimation" not in cfg:
        raise InvalidConfig("config is missing the 'estimation' section")
    est = cfg["estimation"]
    _check_keys(est, _EST_KEYS, "estimation")
    try:
        K = int(est["K"])
    except KeyError as exc:
        raise InvalidConfig("estimation section is missing 'K'") from exc
    if K < 0:
        raise InvalidConfig("K must be nonnegative")

    sigma_cfg = est.get("sigma", {"source": "given", "value": None})
    _check_keys(sigma_cfg, _SIGMA_KEYS, "estimation.sigma")
    source = sigma_cfg.get("source", "given")
    if source == "given":
        value = sigma_cfg.get("value")
        if value is None:
            value = cfg.get("simulation", {}).get("sigma")
        if value is None:
            raise InvalidConfig("estimation.sigma.value is required for source 'given'")
        sigma, use_qv = float(value), False
    elif source == "quadratic_variation":
        sigma, use_qv = None, True
    else:
        raise InvalidConfig(f"unknown sigma source {source!r}")

    admissible = _parse_admissible(est.get("admissible", {}))

    obs = est.get("observation", {"mode": "continuous"})
    _check_keys(obs, _OBS_KEYS, "observation")
    mode = obs.get("mode", "continuous")
    if mode == "discrete":
        if "delta" not in obs:
            raise InvalidConfig("discrete observation mode requires 'delta'")
        traj = subsample(traj, float(obs["delta"]))
        discrete = True
    elif mode == "continuous":
        discrete = False
    else:
        raise InvalidConfig(f"unknown observation mode {mode!r}")

    result = estimate_from_trajectory(
        traj,
        _parse_potential(cfg, "confining"),
        K,
        sigma=sigma,
        admissible=admissible,
        discrete=discrete,
        use_quadratic_variation=use_qv,
    )
    curve_x = _parse_curve_grid(est.get("curve_grid", {}))
    return result, curve_x


def cmd_estimate(cfg: dict, trajectory_path, out: Path) -> int:
    if trajectory_path is None:
        raise InvalidConfig("estimate requires --trajectory")
    traj = _read_trajectory_with_sidecar(trajectory_path)
    result, curve_x = _pipeline_from_config(cfg, traj)

    serialize.write_json(out / "moments.json", moments_to_dict(result.moments))
    serialize.write_json(out / "basis.json", basis_to_dict(result.basis))
    sysd = result.system
    serialize.write_json(
        out / "system.json",
        {
            "K": sysd.K,
            "B": [float(v) for v in sysd.B.ravel()],
            "alpha": sysd.alpha.tolist(),
            "gamma": sysd.gamma.tolist(),
            "sigma": sysd.sigma,
            "condition_estimate": sysd.condition_estimate,
        },
    )
    serialize.write_json(
        out / "estimate.json",
        {
            "kind": result.kernel.kind,
            "beta_hat": result.kernel.beta_hat.tolist(),
            "basis": "basis.json",
            "monomial_coefficients": result.kernel.monomial_coefficients.tolist(),
        },
    )
    columns = [curve_x, result.kernel(curve_x)]
    header = "x,w_prime_estimate"
    if "interaction" in cfg:
        true_kernel = _parse_potential(cfg, "interaction")
        columns.append(true_kernel.derivative(curve_x))
        header += ",w_prime_true"
    serialize.write_csv(out / "kernel_curve.csv", header, columns)
    print(
        f"wrote estimate (K = {result.system.K}, "
        f"condition ~ {result.system.condition_estimate:.3g}) to {out}"
    )
    return 0


def _parse_analytic(text: str) -> Gaussian:
    try:
        kind, params = text.split(":", 1)
        mean, var = (float(p) for p in params.split(","))
    except ValueError as exc:
        raise InvalidConfig(
            f"--analytic must look like 'gaussian:MEAN,VAR', got {text!r}"
        ) from exc
    if kind != "gaussian":
        raise InvalidConfig(f"unknown analytic measure {kind!r}")
    return Gaussian(mean=mean, var=var)


def cmd_basis(cfg: dict, trajectory_path, analytic, out: Path) -> int:
    est = cfg.get("estimation", {})
    _check_keys(est, _EST_KEYS, "estimation")
    if "K" not in est:
        raise InvalidConfig("estimation section is missing 'K'")
    K = int(est["K"])
    if analytic is not None:
        moments = analytic_moments(_parse_analytic(analytic), 2 * K)
    elif trajectory_path is not None:
        traj = _read_trajectory_with_sidecar(trajectory_path)
        moments = empirical_moments_continuous(traj, 2 * K)
    else:
        raise InvalidConfig("basis requires --trajectory or --analytic")
    basis = build_basis(moments, K)
    serialize.write_json(out / "basis.json", basis_to_dict(basis))
    x = _parse_curve_grid(est.get("curve_grid", {}))
    columns = [x] + [basis.eval(k, x) for k in range(K + 1)]
    header = "x," + ",".join(f"psi_{k}" for k in range(K + 1))
    serialize.write_csv(out / "basis_samples.csv", header, columns)
    print(f"wrote basis (K = {K}) to {out}")
    return 0


def cmd_convergence(cfg: dict, out: Path, seed_override, threads: int) -> int:
    if "convergence" not in cfg:
        raise InvalidConfig("config is missing the 'convergence' section")
    conv = cfg["convergence"]
    _check_keys(conv, _CONV_KEYS, "convergence")
    try:
        grid = [float(g) for g in conv["grid"]]
        seeds = int(conv["seeds"])
    except KeyError as exc:
        raise InvalidConfig(f"convergence section is missing {exc}") from exc

    sim = _parse_sim(cfg, seed_override)
    base_seed = _child_seed(sim.seed, "convergence")

    self_test = conv.get("self_test")
    if self_test is not None:
        if self_test == "constant":
            runner = _SelfTestConstant()
        elif self_test == "inverse_sqrt":
            runner = _SelfTestInverseSqrt()
        else:
            raise InvalidConfig(f"unknown self_test mode {self_test!r}")
        results = {self_test: rate_study(grid, runner, seeds, base_seed, n_jobs=threads)}
    else:
        vary = conv.get("vary", "T")
        if vary not in ("T", "N"):
            raise InvalidConfig("convergence.vary must be 'T' or 'N'")
        truth_cfg = conv.get("truth", {"mean": 0.0, "var": 0.5})
        _check_keys(truth_cfg, _TRUTH_KEYS, "truth")
        estimands = tuple(conv.get("estimands", ["moment_error"]))
        runner = GaussianTruthRunner(
            vary=vary,
            confining=_parse_potential(cfg, "confining"),
            interaction=_parse_potential(cfg, "interaction"),
            truth=Gaussian(float(truth_cfg.get("mean", 0.0)), float(truth_cfg.get("var", 0.5))),
            true_kernel_coeffs=tuple(conv.get("true_kernel_coeffs", [0.0, 1.0])),
            estimands=estimands,
            N=sim.N,
            T=sim.T,
            h=sim.h,
            sigma=sim.sigma,
            K=int(conv.get("K", 2)),
            degree=int(conv.get("degree", 1)),
            moment_order=int(conv.get("moment_order", 2)),
        )
        results = rate_study_multi(grid, runner, seeds, base_seed, n_jobs=threads)

    summary = {}
    for name, res in results.items():
        serialize.write_csv(
            out / f"rate_{name}.csv",
            "grid_value,mean_error,stderr,n_seeds",
            [res.grid, res.mean_errors, res.stderrs, res.n_seeds.astype(float)],
        )
        summary[name] = {
            "slope": res.slope,
            "slope_stderr": res.slope_stderr,
            "grid": res.grid.tolist(),
            "mean_errors": res.mean_errors.tolist(),
            "n_seeds": res.n_seeds.tolist(),
        }
    serialize.write_json(out / "rate.json", summary)
    for name, res in results.items():
        print(f"{name}: slope = {res.slope:.4f} +- {res.slope_stderr:.4f}")
    return 0


class _SelfTestConstant:
    def __call__(self, grid_value: float, seed: int) -> float:
        return 1.0


class _SelfTestInverseSqrt:
    def __call__(self, grid_value: float, seed: int) -> float:
        return 1.0 / np.sqrt(grid_value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipskernel",
        description="Infer interaction kernels of particle systems from a single trajectory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "integrate the particle system and store one particle's path"),
        ("basis", "build the orthonormal polynomial basis from moments"),
        ("estimate", "run the full kernel-estimation pipeline on a trajectory"),
        ("convergence", "run a convergence-rate study over a parameter grid"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker count for study cells")
        if name in ("basis", "estimate"):
            p.add_argument("--trajectory", default=None, help="path to a trajectory CSV")
        if name == "basis":
            p.add_argument(
                "--analytic",
                default=None,
                help="closed-form moments instead of a trajectory, e.g. gaussian:0,0.5",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.seed, args.threads)
        if args.command == "estimate":
            return cmd_estimate(cfg, args.trajectory, out)
        if args.command == "basis":
            return cmd_basis(cfg, args.trajectory, args.analytic, out)
        if args.command == "convergence":
            return cmd_convergence(cfg, out, args.seed, args.threads)
        raise InvalidConfig(f"unknown command {args.command!r}")
    except NonFinitePosition as exc:
        print(f"simulation blew up: {exc}", file=sys.stderr)
        return 3
    except HankelNotPositiveDefinite as exc:
        print(
            f"basis construction failed: {exc}\n"
            "hint: reduce K or increase the observation horizon T",
            file=sys.stderr,
        )
        return 4
    except SingularSystem as exc:
        print(
            f"linear solve failed: {exc}\nhint: reduce K or increase T",
            file=sys.stderr,
        )
        return 5
    except (IpsKernelError, KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
