"""Exception types shared across the package."""


class GaussMetroError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(GaussMetroError, ValueError):
    """Input has the wrong shape, symmetry or range."""


class DomainError(GaussMetroError, ValueError):
    """A parametrized family was evaluated outside its domain."""

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class NumericFailure(GaussMetroError, ArithmeticError):
    """A computation cannot be carried out to the required accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SingularInformationError(NumericFailure):
    """The Fisher information matrix has (numerically) null directions."""

    def __init__(self, message, null_directions=None):
        super().__init__(message, {"null_directions": null_directions})
        self.null_directions = null_directions


class ClosedFormSingularityError(NumericFailure):
    """A closed-form expression is evaluated at one of its poles."""


class IncreaseCutoffError(NumericFailure):
    """Fock truncation loses more probability than the configured bound."""
