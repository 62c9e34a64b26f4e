"""Exception taxonomy shared across the package.

The command line maps these onto exit codes: usage errors -> 2,
domain/validity errors -> 3, numerical failures -> 1.
"""


class WignerFlowError(Exception):
    """Base class for all package errors."""


class UsageError(WignerFlowError):
    """Caller passed arguments that violate an interface contract."""


class DomainError(WignerFlowError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ValidityError(DomainError):
    """Parameters left the validity domain of a perturbative approximation."""


class NumericalError(WignerFlowError, RuntimeError):
    """A numerical procedure failed to reach its accuracy target.

    ``payload`` optionally carries the best partial result (for example a
    truncated trajectory or an integral estimate with its error bound).
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload
