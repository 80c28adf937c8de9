"""Euler-Maruyama integration of the interacting particle system.

The system of N coupled SDEs

    dX^(n) = -V'(X^(n)) dt - (1/N) sum_i W'(X^(n) - X^(i)) dt + sqrt(2*sigma) dB^(n)

is advanced with the explicit Euler-Maruyama step.  Observations are the
path of a single particle on a uniform time grid; the estimator modules
never see the rest of the ensemble.

Randomness is organized as one counter-based Philox stream per particle,
keyed by (seed, particle index), so the noise fed to particle n does not
depend on loop order or on how force evaluation might be scheduled.
Integration itself is single-threaded; all reductions use numpy's fixed
summation order, which makes runs bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .errors import IncommensurateDelta, InvalidConfig, NonFinitePosition
from .potentials import PotentialSpec
from . import serialize

BLOWUP_LIMIT = 1e8
_GRID_RTOL = 1e-9
_NOISE_BLOCK = 8192


@dataclass(frozen=True)
class DeterministicInit:
    """All particles start at the same point x0."""

    x0: float = 0.0


@dataclass(frozen=True)
class GaussianIIDInit:
    """Particles start i.i.d. Gaussian with the given mean and variance."""

    mean: float = 0.0
    var: float = 1.0


InitSpec = Union[DeterministicInit, GaussianIIDInit]


@dataclass(frozen=True)
class SimConfig:
    """Integration parameters for one run of the particle system.

    Parameters
    ----------
    N : int
        Number of particles.
    T : float
        Time horizon; T/h must be a positive integer.
    h : float
        Euler-Maruyama time step.
    sigma : float
        Diffusion coefficient.  sigma = 0 is accepted here (deterministic
        dynamics, used by tests); the estimator modules reject it.
    seed : int
        64-bit seed from which every per-particle stream is derived.
    init : DeterministicInit or GaussianIIDInit
        Initial condition.
    burn_in : float
        Time span discarded from the front of the stored path.
    store_stride : int
        Keep every store_stride-th grid point; stride 1 is treated as the
        continuous-observation case.
    """

    N: int
    T: float
    h: float
    sigma: float
    seed: int
    init: InitSpec = DeterministicInit(0.0)
    burn_in: float = 0.0
    store_stride: int = 1

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.h))

    def validate(self) -> None:
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise InvalidConfig(f"N must be a positive integer, got {self.N!r}")
        if not (self.T > 0.0) or not (self.h > 0.0):
            raise InvalidConfig("T and h must be positive")
        steps = self.T / self.h
        if abs(steps - round(steps)) > _GRID_RTOL * max(1.0, round(steps)) or round(steps) < 1:
            raise InvalidConfig(f"T/h must be a positive integer, got {steps}")
        if self.sigma < 0.0:
            raise InvalidConfig("sigma must be nonnegative")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig("seed must fit in 64 bits")
        if not 0.0 <= self.burn_in < self.T:
            raise InvalidConfig("burn_in must satisfy 0 <= burn_in < T")
        if not isinstance(self.store_stride, (int, np.integer)) or self.store_stride < 1:
            raise InvalidConfig("store_stride must be an integer >= 1")
        if isinstance(self.init, GaussianIIDInit) and self.init.var < 0.0:
            raise InvalidConfig("initial variance must be nonnegative")


@dataclass(frozen=True)
class TrajectoryMeta:
    h_effective: float
    T: float
    N_origin: int
    sigma_used: float
    seed: int


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A single particle's observed path on a uniform time grid."""

    times: np.ndarray
    values: np.ndarray
    meta: TrajectoryMeta

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.ndim != 1 or t.size != v.size or t.size < 2:
            raise InvalidConfig("times and values must be 1-D arrays of equal length >= 2")
        d = np.diff(t)
        h = self.meta.h_effective
        if h <= 0 or np.max(np.abs(d - h)) > _GRID_RTOL * h:
            raise InvalidConfig("time grid is not uniform with spacing h_effective")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.times.size

    @property
    def spacing(self) -> float:
        return self.meta.h_effective

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])


def interaction_drift(positions, interaction: PotentialSpec, mode: str = "auto"):
    """Mean pairwise force (1/N) sum_i W'(x_n - x_i) for every particle n.

    The generic path evaluates all N^2 pairwise separations.  For
    polynomial interaction families an O(N * degree) power-sum path is
    used instead (``mode="auto"``); both paths agree to 1e-10 relative.
    """
    x = np.asarray(positions, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise InvalidConfig("positions must be a nonempty 1-D array")
    coeffs = interaction.derivative_coefficients()
    if mode == "auto":
        mode = "powersum" if coeffs is not None else "pairwise"
    if mode == "powersum":
        if coeffs is None:
            raise InvalidConfig("power-sum path requires a polynomial interaction")
        return _powersum_drift(x, np.asarray(coeffs, dtype=float))
    if mode == "pairwise":
        diffs = x[:, None] - x[None, :]
        return interaction.derivative(diffs).mean(axis=1)
    raise InvalidConfig(f"unknown force mode {mode!r}")


def _powersum_table(coeffs: np.ndarray) -> np.ndarray:
    # T[m, p] multiplies x^m * S_p in the binomial expansion of the
    # pairwise mean: sum_q w_q (x - y)^q with S_p = sum_i y_i^p.
    d = coeffs.size - 1
    table = np.zeros((d + 1, d + 1))
    for m in range(d + 1):
        for p in range(d + 1 - m):
            table[m, p] = coeffs[m + p] * math.comb(m + p, m) * (-1.0) ** p
    return table


def _powersum_drift(x: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    d = coeffs.size - 1
    powers = np.empty((d + 1, x.size))
    powers[0] = 1.0
    for p in range(1, d + 1):
        np.multiply(powers[p - 1], x, out=powers[p])
    sums = powers.sum(axis=1)
    cm = _powersum_table(coeffs) @ sums
    return (cm @ powers) / x.size


def _particle_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


def _initial_positions(cfg: SimConfig, gens) -> np.ndarray:
    if isinstance(cfg.init, DeterministicInit):
        return np.full(cfg.N, float(cfg.init.x0))
    sd = math.sqrt(cfg.init.var)
    return np.array([cfg.init.mean + sd * g.standard_normal() for g in gens])


def simulate_ips(
    cfg: SimConfig,
    confining: PotentialSpec,
    interaction: PotentialSpec,
    force_mode: str = "auto",
) -> Trajectory:
    """Integrate the particle system and return the first particle's path.

    Parameters
    ----------
    cfg : SimConfig
    confining, interaction : potential families
        Supply V' and W' in closed form.
    force_mode : {"auto", "powersum", "pairwise"}
        Interaction force path; "auto" picks the power-sum path for
        polynomial families.

    Raises
    ------
    InvalidConfig
        If cfg violates its invariants.
    NonFinitePosition
        If any particle exceeds the blow-up guard (|x| > 1e8).
    """
    return simulate_particles(cfg, confining, interaction, (0,), force_mode)[0]


def simulate_particles(
    cfg: SimConfig,
    confining: PotentialSpec,
    interaction: PotentialSpec,
    particles: Sequence[int] = (0,),
    force_mode: str = "auto",
) -> list[Trajectory]:
    """Same as :func:`simulate_ips` but storing several particles' paths."""
    cfg.validate()
    particles = tuple(int(p) for p in particles)
    if any(p < 0 or p >= cfg.N for p in particles):
        raise InvalidConfig("stored particle index out of range")

    steps = cfg.n_steps
    stride = int(cfg.store_stride)
    m_first = int(math.ceil(cfg.burn_in / cfg.h - _GRID_RTOL))
    n_store = (steps - m_first) // stride + 1
    if n_store < 2:
        raise InvalidConfig("fewer than two points would be stored")

    gens = [_particle_generator(cfg.seed, n) for n in range(cfg.N)]
    x = _initial_positions(cfg, gens)
    stored = np.empty((n_store, len(particles)))
    store_col = np.array(particles, dtype=int)

    noise_scale = math.sqrt(2.0 * cfg.sigma * cfg.h)
    step_fn = _make_stepper(cfg, confining, interaction, force_mode)

    next_store = m_first
    out_row = 0
    if next_store == 0:
        stored[0] = x[store_col]
        out_row, next_store = 1, stride

    m = 0
    while m < steps:
        nb = min(_NOISE_BLOCK, steps - m)
        if noise_scale > 0.0:
            noise = np.empty((nb, cfg.N))
            for n in range(cfg.N):
                noise[:, n] = gens[n].standard_normal(nb)
            noise *= noise_scale
        else:
            noise = None
        for j in range(nb):
            step_fn(x, noise[j] if noise is not None else None)
            m += 1
            amax = float(np.abs(x).max())
            if not amax <= BLOWUP_LIMIT:
                raise NonFinitePosition(step=m, value=amax)
            if m == next_store:
                stored[out_row] = x[store_col]
                out_row += 1
                next_store += stride
    assert out_row == n_store

    h_eff = cfg.h * stride
    times = (m_first + stride * np.arange(n_store)) * cfg.h
    meta = TrajectoryMeta(
        h_effective=h_eff,
        T=float(times[-1] - times[0]),
        N_origin=cfg.N,
        sigma_used=cfg.sigma,
        seed=int(cfg.seed),
    )
    return [
        Trajectory(times=times.copy(), values=stored[:, i].copy(), meta=meta)
        for i in range(len(particles))
    ]


def _make_stepper(cfg, confining, interaction, force_mode):
    """Return an in-place Euler-Maruyama step x <- x + h*drift + noise."""
    h = cfg.h
    v_coeffs = confining.derivative_coefficients()
    w_coeffs = interaction.derivative_coefficients()
    affine = (
        force_mode == "auto"
        and v_coeffs is not None
        and w_coeffs is not None
        and v_coeffs.size <= 2
        and w_coeffs.size <= 2
    )
    if affine:
        v0 = float(v_coeffs[0])
        v1 = float(v_coeffs[1]) if v_coeffs.size > 1 else 0.0
        w0 = float(w_coeffs[0])
        w1 = float(w_coeffs[1]) if w_coeffs.size > 1 else 0.0
        # drift = -(v0 + w0) - v1*x - w1*(x - mean(x)) collapses to an
        # affine update, the O(N) fast path for linear interactions.
        scale = 1.0 - h * (v1 + w1)
        const = -h * (v0 + w0)
        hw1 = h * w1

        def step(x, noise):
            xm = x.mean()
            x *= scale
            x += const + hw1 * xm
            if noise is not None:
                x += noise

        return step

    def step(x, noise):
        drift = -confining.derivative(x) - interaction_drift(x, interaction, force_mode)
        x += h * drift
        if noise is not None:
            x += noise

    return step


def subsample(traj: Trajectory, delta: float) -> Trajectory:
    """Thin a trajectory to sampling interval delta (low-frequency regime).

    delta must be an integer multiple of the stored grid spacing; index 0
    is always retained.
    """
    ratio = delta / traj.spacing
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > _GRID_RTOL * r:
        raise IncommensurateDelta(
            f"delta = {delta} is not a multiple of grid spacing {traj.spacing}"
        )
    if r == 1:
        return traj
    times = traj.times[::r]
    if times.size < 2:
        raise IncommensurateDelta("subsampling would leave fewer than two points")
    meta = replace(
        traj.meta,
        h_effective=traj.spacing * r,
        T=float(times[-1] - times[0]),
    )
    return Trajectory(times=times.copy(), values=traj.values[::r].copy(), meta=meta)


def write_trajectory(traj: Trajectory, csv_path, sidecar_path=None) -> None:
    """Write a trajectory as CSV (header ``t,x``) plus a JSON metadata sidecar."""
    with open(csv_path, "w") as fh:
        fh.write("t,x\n")
        for t, v in zip(traj.times, traj.values):
            fh.write(f"{serialize.format_float(t)},{serialize.format_float(v)}\n")
    if sidecar_path is not None:
        meta = traj.meta
        serialize.write_json(
            sidecar_path,
            {
                "h": meta.h_effective,
                "T": meta.T,
                "N": meta.N_origin,
                "sigma": meta.sigma_used,
                "seed": meta.seed,
                "delta": meta.h_effective,
            },
        )


def read_trajectory(csv_path, sidecar_path=None) -> Trajectory:
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidConfig(f"{csv_path} is not a two-column t,x file")
    times, values = data[:, 0], data[:, 1]
    if sidecar_path is not None:
        m = serialize.read_json(sidecar_path)
        meta = TrajectoryMeta(
            h_effective=float(m["h"]),
            T=float(m["T"]),
            N_origin=int(m["N"]),
            sigma_used=float(m["sigma"]),
            seed=int(m["seed"]),
        )
    else:
        h = float(np.median(np.diff(times)))
        meta = TrajectoryMeta(
            h_effective=h,
            T=float(times[-1] - times[0]),
            N_origin=0,
            sigma_used=float("nan"),
            seed=0,
        )
    return Trajectory(times=times, values=values, meta=meta)
