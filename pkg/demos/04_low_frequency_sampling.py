"""
Estimation from low-frequency observations
==========================================

Only time averages of the observed particle enter the estimator, so
coarsening the sampling interval barely changes the result: thinning
the same path to delta = 1, 2, 4, 8 leaves roughly the same number of
effective (weakly correlated) samples.  Here the quartic-plus-cosine
interaction force is recovered from each thinned series; at this
moderate horizon the absolute error is dominated by the data budget,
while the sampling rate hardly matters.
"""

import ipskernel as ik

interaction = ik.PolyCos(coeffs=(0.0, 0.0, 0.5, -1.0 / 3.0, 0.25), amplitude=10.0)

cfg = ik.SimConfig(N=100, T=2000.0, h=0.01, sigma=1.0, seed=1)
traj = ik.simulate_ips(cfg, ik.Quadratic(1.0), interaction)
print(f"fine path: {len(traj)} samples")

errors = {}
print("\n delta   samples   relative L2 error (central 95% mass)")
for delta in (1.0, 2.0, 4.0, 8.0):
    sub = ik.subsample(traj, delta)
    result = ik.estimate_from_trajectory(
        sub, ik.Quadratic(1.0), K=4, sigma=1.0,
        discrete=True, admissible=ik.Unconstrained(),
    )
    samples = sub.values[1:]
    lo, hi = ik.central_mass_interval(samples, 0.95)
    rho_hat = ik.EmpiricalMeasure(samples).restricted(lo, hi)
    errors[delta] = ik.relative_l2_error(result.kernel, interaction.derivative, rho_hat)
    print(f"  {delta:4.0f}   {len(sub):7d}   {errors[delta]:.4f}")

print(f"\ncoarsest / finest error ratio: {errors[8.0] / errors[1.0]:.2f}")
