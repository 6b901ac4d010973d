"""Exception types shared across the package."""


class GpwellsError(Exception):
    """Base class for all gpwells errors."""


class ConfigurationError(GpwellsError):
    """Invalid or inconsistent run configuration."""


class GeometryError(GpwellsError):
    """Degenerate or overlapping well geometry."""


class ResolutionError(GpwellsError):
    """Grid too coarse for the requested feature scale."""


class IntegrationError(GpwellsError):
    """ODE integration produced a non-finite state.

    Carries the last radius at which the state was still finite.
    """

    def __init__(self, message, last_r=None):
        super().__init__(message)
        self.last_r = last_r


class SolverError(GpwellsError):
    """Linear or nonlinear iteration failed to converge."""


class FormatError(GpwellsError):
    """Malformed persisted artifact (field file, profile, config)."""


class NumericError(GpwellsError):
    """Non-finite values encountered in field arithmetic."""


class NotApplicableError(GpwellsError):
    """Requested diagnostic is undefined for this potential."""
