"""Generalized method of moments for the interaction kernel.

The stationary Fokker-Planck equation, tested against the orthonormal
polynomials psi_i, yields for each i

    alpha_i + sum_k beta_k B_ik = sigma * gamma_i,

where alpha and beta are the generalized Fourier coefficients of the
(known) confining force and the (unknown) interaction kernel, B_ik is
the pairing of psi_i with the convolution psi_k * rho, and gamma_i is
the mean of psi_i'.  Truncating at degree K and replacing moments by
their empirical estimates gives a dense (K+1)-square linear system; the
solution, optionally projected onto an admissible set, defines the
kernel estimate sum_k beta_k psi_k.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, solve_triangular

from .errors import DegreeOutOfRange, InvalidConfig, OrderTooHigh, SingularSystem
from .moments import (
    MomentVector,
    discrete_drift_average,
    empirical_moments_continuous,
    empirical_moments_discrete,
    quadratic_variation_sigma,
    weighted_drift_average,
)
from .orthopoly import OrthoBasis, build_basis
from .potentials import PotentialSpec
from .simulate import Trajectory

logger = logging.getLogger(__name__)

_SINGULAR_PIVOT_RTOL = 1e-14
_ILL_CONDITIONED = 1e10


@dataclass(frozen=True)
class EuclideanBall:
    """Admissible coefficients with Euclidean norm at most ``radius``."""

    radius: float = 100.0

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidConfig("ball radius must be positive")


@dataclass(frozen=True, eq=False)
class Box:
    """Admissible coefficients clamped coordinatewise to [lower, upper]."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(lo >= hi):
            raise InvalidConfig("box bounds must satisfy lower < upper per coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass(frozen=True)
class Unconstrained:
    """No projection."""


AdmissibleSet = Union[EuclideanBall, Box, Unconstrained]


@dataclass(eq=False)
class MomentSystem:
    """Assembled truncated system B beta = sigma*gamma - alpha."""

    K: int
    B: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    sigma: float
    condition_estimate: float = field(default=float("nan"))

    def __post_init__(self):
        n = self.K + 1
        self.B = np.asarray(self.B, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        if self.B.shape != (n, n) or self.alpha.shape != (n,) or self.gamma.shape != (n,):
            raise InvalidConfig("system dimensions are inconsistent")
        if not (
            np.all(np.isfinite(self.B))
            and np.all(np.isfinite(self.alpha))
            and np.all(np.isfinite(self.gamma))
        ):
            raise InvalidConfig("system entries must be finite")
        if not self.sigma > 0.0:
            raise InvalidConfig("estimation requires sigma > 0")
        if abs(self.gamma[0]) > 1e-12:
            raise InvalidConfig("gamma[0] must vanish (psi_0' = 0)")
        if abs(self.B[0, 0] - 1.0) > 1e-12:
            raise InvalidConfig("B[0][0] must equal 1 for unit-mass moments")

    @property
    def rhs(self) -> np.ndarray:
        return self.sigma * self.gamma - self.alpha


def assemble_gamma(basis: OrthoBasis, moments: MomentVector) -> np.ndarray:
    """gamma_i = (1/c_i) sum_{j=1..i} j lam_ij M^(j-1), the mean of psi_i'."""
    if basis.K >= 1 and moments.R < basis.K - 1:
        raise OrderTooHigh(f"gamma needs moments up to order {basis.K - 1}")
    gamma = np.zeros(basis.K + 1)
    for i in range(1, basis.K + 1):
        j = np.arange(1, i + 1)
        gamma[i] = np.dot(j * basis.lam[i, 1 : i + 1], moments.values[j - 1]) / basis.c[i]
    return gamma


def assemble_alpha(
    basis: OrthoBasis, traj: Trajectory, confining: PotentialSpec, discrete: bool = False
) -> np.ndarray:
    """alpha_i = (1/c_i) sum_j lam_ij <V'(Y) Y^j>, the empirical Fourier
    coefficients of the confining force.

    ``discrete`` switches the time average to the sample convention of
    :func:`ipskernel.moments.empirical_moments_discrete`.
    """
    average = discrete_drift_average if discrete else weighted_drift_average
    drift_means = np.array(
        [average(traj, confining, j) for j in range(basis.K + 1)]
    )
    return basis.coefficient_matrix() @ drift_means


def assemble_alpha_from_moments(
    basis: OrthoBasis, moments: MomentVector, confining: PotentialSpec
) -> np.ndarray:
    """Exact-moment variant of :func:`assemble_alpha` for polynomial V'.

    Replaces the time average of V'(Y) Y^j by sum_q v_q M^(q+j); used to
    assemble exact systems for closed-form invariant measures.
    """
    v = confining.derivative_coefficients()
    if v is None:
        raise InvalidConfig("exact alpha requires a polynomial confining force")
    v = np.asarray(v, dtype=float)
    deg = v.size - 1
    if moments.R < deg + basis.K:
        raise OrderTooHigh(
            f"exact alpha needs moments up to order {deg + basis.K} (R = {moments.R})"
        )
    drift_means = np.array(
        [np.dot(v, moments.values[j : j + deg + 1]) for j in range(basis.K + 1)]
    )
    return basis.coefficient_matrix() @ drift_means


def _shifted_moment_products(moments: MomentVector, K: int) -> np.ndarray:
    # G[l, j] = E[X^l (X - Y)^j] for independent X, Y ~ rho, expanded by
    # the binomial theorem into products of plain moments.
    G = np.zeros((K + 1, K + 1))
    M = moments.values
    for j in range(K + 1):
        for m in range(j + 1):
            w = (-1.0) ** (j - m) * math.comb(j, m) * M[j - m]
            G[:, j] += w * M[m : m + K + 1]
    return G


def assemble_B(basis: OrthoBasis, moments: MomentVector) -> np.ndarray:
    """B_ik = E[psi_i(X) (psi_k * rho)(X)] via the binomial triple sum."""
    if moments.R < 2 * basis.K:
        raise OrderTooHigh(f"B needs moments up to order {2 * basis.K}")
    G = _shifted_moment_products(moments, basis.K)
    C = basis.coefficient_matrix()
    return C @ G @ C.T


def solve_coefficients(system: MomentSystem) -> np.ndarray:
    """Solve the dense system by pivoted LU; records the condition estimate.

    Raises :class:`SingularSystem` when a pivot falls below 1e-14 of the
    largest one.  Ill conditioning (estimate above 1e10) is only logged:
    the projection step is the safeguard against unstable solutions.
    """
    B = system.B
    system.condition_estimate = float(np.linalg.cond(B))
    try:
        with warnings.catch_warnings():
            # exact singularity is detected by the pivot gate below
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(B)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - lu_factor rarely raises
        raise SingularSystem(str(exc)) from exc
    diag = np.abs(np.diag(lu))
    if np.min(diag) < _SINGULAR_PIVOT_RTOL * np.max(diag):
        raise SingularSystem(
            "system matrix is numerically singular; reduce K or increase T"
        )
    if system.condition_estimate > _ILL_CONDITIONED:
        logger.warning(
            "system condition estimate %.3g exceeds %.0g; solving anyway "
            "(projection onto the admissible set is the safeguard)",
            system.condition_estimate,
            _ILL_CONDITIONED,
        )
    return lu_solve((lu, piv), system.rhs)


def project(beta: np.ndarray, admissible: AdmissibleSet) -> np.ndarray:
    """Euclidean projection of a coefficient vector onto the admissible set."""
    beta = np.asarray(beta, dtype=float)
    if isinstance(admissible, Unconstrained):
        return beta.copy()
    if isinstance(admissible, EuclideanBall):
        norm = float(np.linalg.norm(beta))
        if norm <= admissible.radius:
            return beta.copy()
        return beta * (admissible.radius / norm)
    if isinstance(admissible, Box):
        if admissible.lower.shape != beta.shape:
            raise InvalidConfig("box dimensions do not match the coefficient vector")
        return np.clip(beta, admissible.lower, admissible.upper)
    raise InvalidConfig(f"unknown admissible set {admissible!r}")


@dataclass(frozen=True, eq=False)
class KernelEstimate:
    """Evaluable estimate sum_k beta_k psi_k of a kernel or drift force."""

    beta_hat: np.ndarray
    basis: OrthoBasis
    kind: str = "interaction"

    def __post_init__(self):
        b = np.asarray(self.beta_hat, dtype=float)
        if b.shape != (self.basis.K + 1,):
            raise InvalidConfig("coefficient length must equal K + 1")
        if self.kind not in ("interaction", "drift"):
            raise InvalidConfig(f"unknown estimate kind {self.kind!r}")
        object.__setattr__(self, "beta_hat", b)

    @property
    def monomial_coefficients(self) -> np.ndarray:
        """Ascending monomial coefficients of the expanded estimate."""
        return self.beta_hat @ self.basis.coefficient_matrix()

    def __call__(self, x):
        return npoly.polyval(np.asarray(x, dtype=float), self.monomial_coefficients)


def estimate_kernel(beta_hat, basis: OrthoBasis, kind: str = "interaction") -> KernelEstimate:
    """Wrap solved (projected) coefficients as an evaluable kernel estimate."""
    return KernelEstimate(beta_hat=np.asarray(beta_hat, dtype=float), basis=basis, kind=kind)


def estimate_drift(
    beta_known,
    system: MomentSystem,
    admissible: AdmissibleSet,
    basis: OrthoBasis,
) -> KernelEstimate:
    """Closed-form drift coefficients alpha = sigma*gamma - B beta for a
    known interaction, projected and wrapped as a drift estimate.

    With no interaction (beta = 0) this degenerates to alpha = sigma*gamma,
    which carries no series-truncation error.
    """
    beta_known = np.asarray(beta_known, dtype=float)
    if beta_known.shape != (system.K + 1,):
        raise InvalidConfig("beta length must equal K + 1")
    alpha_raw = system.sigma * system.gamma - system.B @ beta_known
    return KernelEstimate(
        beta_hat=project(alpha_raw, admissible), basis=basis, kind="drift"
    )


def fourier_from_polynomial(coeffs, basis: OrthoBasis) -> np.ndarray:
    """Generalized Fourier coefficients of a polynomial in the given basis.

    Exact: solves the triangular change-of-basis system; the polynomial
    degree must not exceed basis.K.
    """
    w = np.asarray(coeffs, dtype=float)
    if w.size > basis.K + 1 and np.any(w[basis.K + 1 :] != 0.0):
        raise DegreeOutOfRange(
            f"polynomial of degree {w.size - 1} exceeds basis degree {basis.K}"
        )
    padded = np.zeros(basis.K + 1)
    padded[: min(w.size, basis.K + 1)] = w[: basis.K + 1]
    return solve_triangular(basis.coefficient_matrix().T, padded, lower=False)


def diagnostics_delta(
    basis: OrthoBasis, moments: MomentVector, beta_true, K: int
) -> dict:
    """Truncation-bias diagnostics for a ground-truth kernel (test harness).

    ``beta_true`` are the true Fourier coefficients of the kernel up to
    the tail length retained (entries beyond index K form the neglected
    tail); ``basis`` must extend to that length.  Returns the norm of the
    residual e_i = sum_{k>K} B_ik beta_k and the bias bound
    delta = 2 * ||B^{-1} e||.
    """
    beta_true = np.asarray(beta_true, dtype=float)
    if K < 0 or K > basis.K:
        raise DegreeOutOfRange(f"K = {K} outside 0..{basis.K}")
    if beta_true.size > basis.K + 1:
        raise DegreeOutOfRange(
            f"tail of length {beta_true.size - 1} exceeds basis degree {basis.K}"
        )
    B_full = assemble_B(basis, moments)
    tail = beta_true[K + 1 :]
    e = B_full[: K + 1, K + 1 : beta_true.size] @ tail if tail.size else np.zeros(K + 1)
    BK = B_full[: K + 1, : K + 1]
    try:
        delta = 2.0 * float(np.linalg.norm(np.linalg.solve(BK, e)))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("truncated B block is singular") from exc
    return {"residual_norm": float(np.linalg.norm(e)), "delta_estimate": delta}


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """All artifacts of one run of the estimation pipeline."""

    moments: MomentVector
    basis: OrthoBasis
    system: MomentSystem
    beta_unprojected: np.ndarray
    kernel: KernelEstimate


def estimate_from_trajectory(
    traj: Trajectory,
    confining: PotentialSpec,
    K: int,
    sigma: Optional[float] = None,
    admissible: AdmissibleSet = EuclideanBall(100.0),
    discrete: bool = False,
    use_quadratic_variation: bool = False,
    basis_method: str = "cholesky",
) -> EstimationResult:
    """Full estimation pipeline from one observed trajectory.

    Steps: empirical moments of order 0..2K, orthonormal basis, system
    assembly (B, alpha, gamma), pivoted solve, projection onto the
    admissible set, and the evaluable kernel estimate.

    ``sigma`` is the known diffusion coefficient; pass
    ``use_quadratic_variation=True`` to estimate it from the path instead.
    """
    if use_quadratic_variation:
        sigma = quadratic_variation_sigma(traj)
    if sigma is None or not sigma > 0.0:
        raise InvalidConfig("estimation requires a positive diffusion coefficient")
    mom_fn = empirical_moments_discrete if discrete else empirical_moments_continuous
    moments = mom_fn(traj, 2 * K)
    basis = build_basis(moments, K, method=basis_method)
    system = MomentSystem(
        K=K,
        B=assemble_B(basis, moments),
        alpha=assemble_alpha(basis, traj, confining, discrete=discrete),
        gamma=assemble_gamma(basis, moments),
        sigma=float(sigma),
    )
    beta_tilde = solve_coefficients(system)
    beta_hat = project(beta_tilde, admissible)
    if not np.allclose(beta_hat, beta_tilde):
        logger.warning("projection onto the admissible set is active")
    kernel = KernelEstimate(beta_hat=beta_hat, basis=basis, kind="interaction")
    return EstimationResult(
        moments=moments,
        basis=basis,
        system=system,
        beta_unprojected=beta_tilde,
        kernel=kernel,
    )
