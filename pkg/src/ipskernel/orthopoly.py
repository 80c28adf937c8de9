"""Orthonormal polynomials with respect to a measure known by its moments.

Two construction paths are provided.  The reference path evaluates the
signed minors of the moment Hankel matrix directly (exact but usable
only for small degree, where the determinants stay well scaled).  The
production path factorizes the Hankel matrix H = L L^T and takes the
rows of L^{-1}, which span the same polynomials with far better
conditioning.  Both paths yield identical normalized polynomials; the
rows are stored together with normalization constants recomputed from
the quadratic form c_k^2 = sum_ij lam_ki lam_kj M^(i+j) so that
psi_k(x) = (1/c_k) sum_j lam_kj x^j is exactly unit-norm against the
source moments.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import solve_triangular

from .errors import (
    DegreeOutOfRange,
    HankelNotPositiveDefinite,
    InvalidConfig,
    MismatchedK,
    OrderTooHigh,
)
from .moments import MomentVector, moments_from_dict, moments_to_dict

logger = logging.getLogger(__name__)

# Cholesky pivots below this fraction of the largest Hankel diagonal entry
# are treated as loss of positive definiteness rather than regularized.
_PD_PIVOT_RTOL = 1e-12
_SMALL_C_WARN = 1e-6


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """Coefficients of polynomials psi_0..psi_K orthonormal w.r.t. the
    measure behind ``source``.

    ``lam`` holds one coefficient row per degree (lower triangular);
    psi_k(x) = (1/c[k]) * sum_j lam[k, j] x^j.
    """

    K: int
    lam: np.ndarray
    c: np.ndarray
    source: MomentVector

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if lam.shape != (self.K + 1, self.K + 1) or c.shape != (self.K + 1,):
            raise InvalidConfig("inconsistent basis dimensions")
        if np.any(c <= 0.0) or np.any(np.diag(lam) <= 0.0):
            raise InvalidConfig("normalizations and leading coefficients must be positive")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "c", c)

    def coefficients(self, k: int) -> np.ndarray:
        """Ascending monomial coefficients of psi_k."""
        self._check_degree(k)
        return self.lam[k, : k + 1] / self.c[k]

    def coefficient_matrix(self) -> np.ndarray:
        """Rows of monomial coefficients for psi_0..psi_K (lower triangular)."""
        return self.lam / self.c[:, None]

    def eval(self, k: int, x):
        """Evaluate psi_k(x) by Horner's scheme."""
        self._check_degree(k)
        return npoly.polyval(np.asarray(x, dtype=float), self.coefficients(k))

    def eval_derivative(self, k: int, x):
        """Evaluate psi_k'(x)."""
        self._check_degree(k)
        dcoef = npoly.polyder(self.coefficients(k))
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, dcoef) if dcoef.size else np.zeros_like(x)

    def _check_degree(self, k: int) -> None:
        if not 0 <= k <= self.K:
            raise DegreeOutOfRange(f"degree {k} outside 0..{self.K}")


def hankel_lambda(moments: MomentVector, k: int, j: int) -> float:
    """Signed minor lambda_kj = (-1)^(k+j) det(Lambda_kj) of the moment matrix.

    Lambda_kj is the k-square matrix obtained from rows i = 0..k-1 of the
    moment table [M^(i+c)]_{c=0..k} by deleting column j.  Serves as the
    exact (small-k) oracle for the stabilized construction path.
    """
    if not 0 <= j <= k:
        raise InvalidConfig(f"need 0 <= j <= k, got j={j}, k={k}")
    if k == 0:
        return 1.0
    if 2 * k - 1 > moments.R:
        raise OrderTooHigh(
            f"lambda_{k}{j} needs moments up to order {2 * k - 1} (R = {moments.R})"
        )
    cols = [c for c in range(k + 1) if c != j]
    minor = np.array([[moments.values[i + c] for c in cols] for i in range(k)])
    return float((-1.0) ** (k + j) * np.linalg.det(minor))


def _cholesky_or_raise(H: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise HankelNotPositiveDefinite(
            "moment Hankel matrix is not positive definite; "
            "reduce K or increase the observation horizon"
        ) from exc
    pivots = np.diag(L) ** 2
    if np.min(pivots) < _PD_PIVOT_RTOL * np.max(np.diag(H)):
        raise HankelNotPositiveDefinite(
            "moment Hankel matrix is numerically semi-definite; "
            "reduce K or increase the observation horizon"
        )
    return L


def build_basis(moments: MomentVector, K: int, method: str = "cholesky") -> OrthoBasis:
    """Construct the orthonormal basis of degree <= K from moments.

    Parameters
    ----------
    moments : MomentVector
        Must cover orders 0..2K.
    K : int
        Highest polynomial degree.
    method : {"cholesky", "determinant"}
        Production path (default) or the minor-expansion reference path.

    Raises
    ------
    OrderTooHigh
        If moments of order 2K are missing.
    HankelNotPositiveDefinite
        If the (K+1)-square Hankel matrix fails the positivity gate.
    """
    if K < 0:
        raise InvalidConfig("K must be nonnegative")
    if moments.R < 2 * K:
        raise OrderTooHigh(f"basis of degree {K} needs moments up to order {2 * K}")
    H = moments.hankel(K + 1)
    L = _cholesky_or_raise(H)

    if method == "cholesky":
        lam = solve_triangular(L, np.eye(K + 1), lower=True)
        lam = np.tril(lam)
    elif method == "determinant":
        lam = np.zeros((K + 1, K + 1))
        for k in range(K + 1):
            for j in range(k + 1):
                lam[k, j] = hankel_lambda(moments, k, j)
    else:
        raise InvalidConfig(f"unknown construction method {method!r}")

    c = np.sqrt(np.einsum("ki,ij,kj->k", lam, H, lam))

    # Assumption-2.3 diagnostic: the determinant-convention normalization
    # c_k = sqrt(D_{k-1} D_k) shrinking toward zero signals near-degeneracy.
    pivots = np.diag(L) ** 2
    dets = np.cumprod(pivots)
    det_c = np.sqrt(np.concatenate(([1.0], dets[:-1])) * dets)
    logger.debug("normalization constants c_k (determinant convention): %s", det_c)
    if np.min(det_c) < _SMALL_C_WARN:
        logger.warning(
            "smallest normalization constant c_k = %.3g < %g; "
            "empirical moments barely support degree %d",
            float(np.min(det_c)),
            _SMALL_C_WARN,
            K,
        )

    return OrthoBasis(K=K, lam=lam, c=c, source=moments)


def basis_distance(a: OrthoBasis, b: OrthoBasis, weight) -> np.ndarray:
    """Per-degree L2(rho) distances between two bases of the same K.

    ``weight`` is any quadrature spec with a ``norm(f)`` method (see
    :mod:`ipskernel.metrics`), defining the measure rho of the integral.
    """
    if a.K != b.K:
        raise MismatchedK(f"bases have K = {a.K} and {b.K}")
    out = np.empty(a.K + 1)
    for k in range(a.K + 1):
        diff = npoly.polysub(a.coefficients(k), b.coefficients(k))
        out[k] = weight.norm(lambda x: npoly.polyval(x, diff))
    return out


def basis_to_dict(basis: OrthoBasis) -> dict:
    tri = [float(basis.lam[k, j]) for k in range(basis.K + 1) for j in range(k + 1)]
    return {
        "K": basis.K,
        "lambda": tri,
        "c": basis.c.tolist(),
        "source": moments_to_dict(basis.source),
    }


def basis_from_dict(d: dict) -> OrthoBasis:
    K = int(d["K"])
    lam = np.zeros((K + 1, K + 1))
    tri = list(d["lambda"])
    pos = 0
    for k in range(K + 1):
        lam[k, : k + 1] = tri[pos : pos + k + 1]
        pos += k + 1
    return OrthoBasis(
        K=K,
        lam=lam,
        c=np.asarray(d["c"], dtype=float),
        source=moments_from_dict(d["source"]),
    )
