"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of a constitutive law."""


class PositivityError(DomainError):
    """A density hit zero or went negative where strict positivity is required."""


class BlowUpError(RuntimeError):
    """A field developed NaN/Inf values during time stepping."""

    def __init__(self, message, t=None, checkpoint=None):
        super().__init__(message)
        self.t = t
        self.checkpoint = checkpoint


class FixedPointDivergenceError(RuntimeError):
    """The implicit velocity update failed to contract; try a smaller dt."""


class IterationLimitError(RuntimeError):
    """An iterative linear solve exhausted its iteration budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(ValueError):
    """A run/sweep configuration file is malformed or inconsistent."""
