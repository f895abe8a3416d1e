"""Exception and warning types raised across the package."""


class DephaseError(Exception):
    """Base class for all package errors."""


class DivergenceError(DephaseError, ArithmeticError):
    """A frequency integral does not converge.

    Attributes
    ----------
    endpoint : float
        Integration endpoint at which the integrand is not integrable.
    """

    def __init__(self, message, endpoint):
        super().__init__(message)
        self.endpoint = endpoint


class SingularityError(DephaseError, ArithmeticError):
    pass


class OutOfRangeError(DephaseError, ValueError):
    """Tabulated data queried outside the sampled range."""


class UnsupportedVariantError(DephaseError, TypeError):
    pass


class DegenerateSchemeError(DephaseError, ValueError):
    """Scheme with vanishing N0, i.e. identically vanishing coherence."""


class DomainError(DephaseError, ValueError):
    pass


class UndefinedPhaseError(DephaseError, ValueError):
    pass


class ConfigError(DephaseError, ValueError):
    pass


class OracleDisagreement(DephaseError):
    pass


class TruncationWarning(UserWarning):
    """Fock-space cutoff too small for the requested thermal accuracy."""


class UnsupportedSpectrumError(DephaseError, ValueError):
    """Spectral density lacks the finite moments an operation needs."""
