"""Exception types shared across the package."""


class IpsKernelError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfig(IpsKernelError):
    """A simulation or run configuration violates its invariants."""


class NonFinitePosition(IpsKernelError):
    """A particle position exceeded the blow-up guard or became non-finite."""

    def __init__(self, step, value):
        self.step = step
        self.value = value
        super().__init__(
            f"particle position blew up at step {step} (max |x| = {value:.6g})"
        )


class IncommensurateDelta(IpsKernelError):
    """Requested sampling interval is not a multiple of the stored grid spacing."""


class EmptyTrajectory(IpsKernelError):
    """Trajectory has too few points for the requested statistic."""


class HankelNotPositiveDefinite(IpsKernelError):
    """Moment Hankel matrix is not numerically positive definite.

    Signals moments inconsistent with any nondegenerate measure: usually
    too little data for the requested basis degree.
    """


class OrderTooHigh(IpsKernelError):
    """Moments of the requested order are not available."""


class DegreeOutOfRange(IpsKernelError):
    """Polynomial degree exceeds the basis truncation."""


class MismatchedK(IpsKernelError):
    """Two bases with different truncation degrees cannot be compared."""


class SingularSystem(IpsKernelError):
    """The assembled linear system is numerically singular."""


class InvalidQuadrature(IpsKernelError):
    """Quadrature specification violates its invariants."""


class RateStudyError(IpsKernelError):
    """A rate-study cell failed for every seed."""
