"""Moment estimation from a single observed trajectory.

Time averages use the left-endpoint Riemann sum throughout, which is the
Ito-consistent discretization of Euler-Maruyama output; the discrete
estimator is the plain average of the samples with index 1..I (the
initial sample is excluded).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EmptyTrajectory, InvalidConfig, OrderTooHigh
from .potentials import PotentialSpec
from .simulate import Trajectory


@dataclass(frozen=True)
class Gaussian:
    """Tag for a Gaussian measure with the given mean and variance."""

    mean: float = 0.0
    var: float = 1.0


@dataclass(frozen=True)
class EmpiricalContinuous:
    T: float
    N: int


@dataclass(frozen=True)
class EmpiricalDiscrete:
    I: int
    delta: float
    N: int


@dataclass(frozen=True)
class Analytic:
    measure: str


Provenance = Union[EmpiricalContinuous, EmpiricalDiscrete, Analytic]


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Moments M^(0..R) of the invariant measure with a provenance flag."""

    values: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise InvalidConfig("moment values must be a nonempty 1-D array")
        if not np.all(np.isfinite(v)):
            raise InvalidConfig("moment values must be finite")
        tol = 0.0 if isinstance(self.provenance, Analytic) else 1e-12
        if abs(v[0] - 1.0) > tol:
            raise InvalidConfig(f"M^(0) must equal 1, got {v[0]!r}")
        object.__setattr__(self, "values", v)

    @property
    def R(self) -> int:
        return self.values.size - 1

    def __getitem__(self, r: int) -> float:
        if not 0 <= r <= self.R:
            raise OrderTooHigh(f"moment of order {r} not available (R = {self.R})")
        return float(self.values[r])

    def hankel(self, size: int) -> np.ndarray:
        """The size-square Hankel matrix H[i, j] = M^(i+j)."""
        if 2 * (size - 1) > self.R:
            raise OrderTooHigh(
                f"Hankel matrix of size {size} needs moments up to order "
                f"{2 * (size - 1)} (R = {self.R})"
            )
        idx = np.arange(size)
        return self.values[idx[:, None] + idx[None, :]]


def _power_means(samples: np.ndarray, R: int) -> np.ndarray:
    out = np.empty(R + 1)
    p = np.ones_like(samples)
    out[0] = p.mean()
    for r in range(1, R + 1):
        p = p * samples
        out[r] = p.mean()
    return out


def empirical_moments_continuous(traj: Trajectory, R: int) -> MomentVector:
    """Left-endpoint Riemann averages (1/T') sum_m Y_m^r h over the stored grid."""
    if R < 0:
        raise InvalidConfig("R must be nonnegative")
    if len(traj) < 2:
        raise EmptyTrajectory("need at least two points")
    # with a uniform grid the h factors cancel: mean over left endpoints
    vals = _power_means(traj.values[:-1], R)
    return MomentVector(
        values=vals,
        provenance=EmpiricalContinuous(T=traj.span, N=traj.meta.N_origin),
    )


def empirical_moments_discrete(traj: Trajectory, R: int) -> MomentVector:
    """Plain averages of Y_i^r over samples i = 1..I (index 0 excluded)."""
    if R < 0:
        raise InvalidConfig("R must be nonnegative")
    if len(traj) < 2:
        raise EmptyTrajectory("need at least two points")
    vals = _power_means(traj.values[1:], R)
    return MomentVector(
        values=vals,
        provenance=EmpiricalDiscrete(
            I=len(traj) - 1, delta=traj.spacing, N=traj.meta.N_origin
        ),
    )


def weighted_drift_average(traj: Trajectory, confining: PotentialSpec, j: int) -> float:
    """Left-endpoint Riemann average of V'(Y_t) * Y_t^j.

    Uses the same discretization as :func:`empirical_moments_continuous`,
    so for V'(x) = x and j = 1 it reproduces the second empirical moment
    exactly.
    """
    if j < 0:
        raise InvalidConfig("power j must be nonnegative")
    if len(traj) < 2:
        raise EmptyTrajectory("need at least two points")
    y = traj.values[:-1]
    return float(np.mean(confining.derivative(y) * y**j))


def discrete_drift_average(traj: Trajectory, confining: PotentialSpec, j: int) -> float:
    """Average of V'(Y_i) * Y_i^j over samples i = 1..I, matching the
    index convention of :func:`empirical_moments_discrete`."""
    if j < 0:
        raise InvalidConfig("power j must be nonnegative")
    if len(traj) < 2:
        raise EmptyTrajectory("need at least two points")
    y = traj.values[1:]
    return float(np.mean(confining.derivative(y) * y**j))


def analytic_moments(measure: Gaussian, R: int) -> MomentVector:
    """Exact Gaussian moments via M^(r) = mean*M^(r-1) + (r-1)*var*M^(r-2)."""
    if measure.var <= 0.0:
        raise InvalidConfig("variance must be positive")
    if R < 0:
        raise InvalidConfig("R must be nonnegative")
    vals = np.empty(R + 1)
    vals[0] = 1.0
    if R >= 1:
        vals[1] = measure.mean
    for r in range(2, R + 1):
        vals[r] = measure.mean * vals[r - 1] + (r - 1) * measure.var * vals[r - 2]
    return MomentVector(
        values=vals,
        provenance=Analytic(measure=f"gaussian({measure.mean},{measure.var})"),
    )


def quadratic_variation_sigma(traj: Trajectory) -> float:
    """Diffusion estimate: sum of squared increments over 2*T'."""
    if len(traj) < 2:
        raise EmptyTrajectory("need at least two points")
    increments = np.diff(traj.values)
    return float(np.sum(increments * increments) / (2.0 * traj.span))


def moments_to_dict(m: MomentVector) -> dict:
    p = m.provenance
    if isinstance(p, EmpiricalContinuous):
        prov = {"kind": "empirical_continuous", "T": p.T, "N": p.N}
    elif isinstance(p, EmpiricalDiscrete):
        prov = {"kind": "empirical_discrete", "I": p.I, "delta": p.delta, "N": p.N}
    else:
        prov = {"kind": "analytic", "measure": p.measure}
    return {"values": m.values.tolist(), "provenance": prov}


def moments_from_dict(d: dict) -> MomentVector:
    p = d["provenance"]
    kind = p.get("kind")
    if kind == "empirical_continuous":
        prov: Provenance = EmpiricalContinuous(T=float(p["T"]), N=int(p["N"]))
    elif kind == "empirical_discrete":
        prov = EmpiricalDiscrete(I=int(p["I"]), delta=float(p["delta"]), N=int(p["N"]))
    elif kind == "analytic":
        prov = Analytic(measure=str(p["measure"]))
    else:
        raise InvalidConfig(f"unknown moment provenance {kind!r}")
    return MomentVector(values=np.asarray(d["values"], dtype=float), provenance=prov)
