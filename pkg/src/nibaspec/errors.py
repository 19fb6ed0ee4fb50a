"""Exception types shared across the package."""


class NibaspecError(Exception):
    """Base class for all package-specific errors."""


class OverdampedBathError(NibaspecError, ValueError):
    """Closed-form correlation coefficients requested for Gamma >= Omega.

    The analytic forms assume an underdamped resonator; callers should
    fall back to the quadrature evaluator.
    """


class UVDivergenceError(NibaspecError, ValueError):
    """Correlation integral requested for a spectral density without UV cutoff."""


class DecoupledKernelError(NibaspecError, ValueError):
    """Semi-infinite kernel integral requested with a non-decaying envelope.

    Raised for alpha == 0, where the integrand stays at delta^2 forever;
    callers must use the analytic decoupled result (chi == 0) instead.
    """


class SingularResponseError(NibaspecError, ArithmeticError):
    """Response denominator below the magnitude floor; point is invalid."""


class ConvergenceError(NibaspecError, RuntimeError):
    """Step-halving or series refinement failed to reach the requested tolerance."""


class TransientError(NibaspecError, RuntimeError):
    """Trajectory tail is not yet periodic; extend the integration horizon."""


class ConfigError(NibaspecError, ValueError):
    """Invalid job configuration (unknown key, bad value, violated invariant)."""
