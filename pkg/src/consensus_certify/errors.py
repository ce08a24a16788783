"""Exception taxonomy shared across the package.

The CLI maps these onto stable exit codes (config 2, numerical 3,
condition-unsatisfied 4, golden mismatch 5, property failure 6).
"""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A config, kernel form, or parameter combination is unusable."""


class PreconditionError(ValueError):
    """A documented precondition between values was violated."""


class NumericalError(RuntimeError):
    """Integration or evaluation produced non-finite results."""


class ConditionUnsatisfiedError(RuntimeError):
    """The requested connectivity condition does not hold; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class GoldenMismatchError(RuntimeError):
    """A reproduction run disagreed with the embedded reference values."""
