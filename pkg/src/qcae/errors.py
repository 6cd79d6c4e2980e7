"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A spec, config, or argument combination that can never be valid."""


class DomainError(ValueError):
    """A runtime value outside the documented domain of an operation."""


class DegenerateInputError(ValueError):
    """Input that makes the requested operation ill-defined (e.g. a zero vector)."""


class UnsupportedOperationError(RuntimeError):
    """Requested something outside the supported gate/encoding set."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss.

    Carries the partial training record (if any) as ``record``.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record
