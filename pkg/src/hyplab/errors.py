"""Shared exception types."""


class ParameterError(ValueError):
    """Arguments violate a documented validity condition."""


class DomainError(ValueError):
    """Evaluation requested outside the domain of definition."""


class DivergenceError(RuntimeError):
    """An integral failed its decay / integrability monitoring."""


class PinchError(RuntimeError):
    """A pole sits (numerically) on an integration path."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
