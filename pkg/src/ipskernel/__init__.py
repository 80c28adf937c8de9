"""Inference of interaction kernels in stochastic particle systems.

The package simulates one-dimensional systems of interacting diffusions,
builds polynomial bases orthonormal with respect to the (unknown)
invariant measure from the moments of a single observed trajectory, and
recovers the interaction force as a truncated generalized Fourier series
by solving a small moment-matched linear system.
"""

from .errors import (
    DegreeOutOfRange,
    EmptyTrajectory,
    HankelNotPositiveDefinite,
    IncommensurateDelta,
    InvalidConfig,
    InvalidQuadrature,
    IpsKernelError,
    MismatchedK,
    NonFinitePosition,
    OrderTooHigh,
    RateStudyError,
    SingularSystem,
)
from .gmm import (
    AdmissibleSet,
    Box,
    EstimationResult,
    EuclideanBall,
    KernelEstimate,
    MomentSystem,
    Unconstrained,
    assemble_B,
    assemble_alpha,
    assemble_alpha_from_moments,
    assemble_gamma,
    diagnostics_delta,
    estimate_drift,
    estimate_from_trajectory,
    estimate_kernel,
    fourier_from_polynomial,
    project,
    solve_coefficients,
)
from .metrics import (
    EmpiricalMeasure,
    ExactDensity,
    GaussianTruthRunner,
    RateResult,
    central_mass_interval,
    l2_rho_distance,
    l2_rho_norm,
    rate_study,
    rate_study_multi,
    relative_l2_error,
)
from .moments import (
    Analytic,
    EmpiricalContinuous,
    EmpiricalDiscrete,
    Gaussian,
    MomentVector,
    analytic_moments,
    empirical_moments_continuous,
    empirical_moments_discrete,
    quadratic_variation_sigma,
    weighted_drift_average,
)
from .orthopoly import (
    OrthoBasis,
    basis_distance,
    build_basis,
    hankel_lambda,
)
from .potentials import (
    Bistable,
    Cosh,
    GaussianWell,
    MorseLike,
    PolyCos,
    Polynomial,
    PotentialSpec,
    Quadratic,
    Zero,
    potential_from_dict,
    potential_to_dict,
)
from .simulate import (
    DeterministicInit,
    GaussianIIDInit,
    SimConfig,
    Trajectory,
    interaction_drift,
    read_trajectory,
    simulate_ips,
    simulate_particles,
    subsample,
    write_trajectory,
)

__version__ = "0.1.0"
