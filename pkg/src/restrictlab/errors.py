"""Exception and warning types shared across the package."""


class RestrictLabError(Exception):
    """Base class for all package errors."""


class DomainError(RestrictLabError):
    """Input outside the admissible domain, or a non-finite result."""


class OrderError(RestrictLabError):
    """Requested derivative/jet order exceeds what the oracle supports."""


class IntegrationError(RestrictLabError):
    """The ODE integrator failed (step-size collapse, solver error)."""


class JetInconsistencyError(RestrictLabError):
    """Taylor-recursion and finite-difference jets disagree beyond tolerance."""

    def __init__(self, message, recursion=None, finite_difference=None):
        super().__init__(message)
        self.recursion = recursion
        self.finite_difference = finite_difference


class SeedError(RestrictLabError):
    """Newton iteration for a tangential frequency did not converge."""


class BranchError(RestrictLabError):
    """Branch continuation detected a jump between adjacent grid nodes."""

    def __init__(self, message, t_split=None):
        super().__init__(message)
        self.t_split = t_split


class LeadingVectorError(RestrictLabError):
    """Analytic leading vector disagrees with the flow-data fit."""


class QuadratureError(RestrictLabError):
    """Curve quadrature failed its refinement convergence contract."""


class EmptyClusterError(RestrictLabError):
    """A spectral cluster contains no basis elements."""


class CapError(RestrictLabError):
    """No cluster frequencies fall in the requested angular cap."""


class FitError(RestrictLabError):
    """Too few lambda groups for an exponent fit."""


class ConfigError(RestrictLabError):
    """Malformed experiment configuration."""


class AdmissibilityWarning(UserWarning):
    """A Newton solve ran close to an admissibility boundary."""


class UncertainClassification(UserWarning):
    """Contact-order plateau too shallow for a confident classification."""


class ExtrapolationWarning(UserWarning):
    """A symbol was evaluated outside its declared region."""
