"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the range where a formula or solver is valid."""


class SizeGuardError(ValueError):
    """An exact computation was requested on an instance above its size guard."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance within its budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
