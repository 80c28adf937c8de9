"""
Orthonormal polynomials from one observed trajectory
====================================================

The estimator expands the unknown interaction force in polynomials
orthonormal with respect to the invariant measure.  That measure is not
known, but its moments can be averaged along a single particle path,
and the polynomials follow from the moments alone.

For the harmonic system the invariant measure is N(0, 1/2) and the
exact basis is the normalized Hermite family, so the quality of the
data-driven basis can be measured directly.
"""

import numpy as np

import ipskernel as ik
from ipskernel.orthopoly import basis_distance

K = 4
cfg = ik.SimConfig(N=200, T=2000.0, h=0.01, sigma=1.0, seed=7)
traj = ik.simulate_ips(cfg, ik.Quadratic(1.0), ik.Quadratic(1.0))

empirical = ik.build_basis(ik.empirical_moments_continuous(traj, 2 * K), K)
exact = ik.build_basis(ik.analytic_moments(ik.Gaussian(0.0, 0.5), 2 * K), K)

print("monomial coefficients (empirical | exact):")
for k in range(K + 1):
    emp = np.round(empirical.coefficients(k), 4)
    ref = np.round(exact.coefficients(k), 4)
    print(f"  degree {k}: {emp} | {ref}")

# orthonormality against the trajectory's own moments
M = ik.empirical_moments_continuous(traj, 2 * K)
C = empirical.coefficient_matrix()
gram = C @ M.hankel(K + 1) @ C.T
print(f"\nmax |gram - identity| = {np.max(np.abs(gram - np.eye(K + 1))):.2e}")

# weighted-L2 distance from the exact polynomials, degree by degree
quad = ik.ExactDensity(ik.Gaussian(0.0, 0.5))
print("L2(rho) distance to closed form:", np.round(basis_distance(empirical, exact, quad), 4))
