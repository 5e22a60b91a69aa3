"""Exception types shared across the package."""


class SizeCapError(ValueError):
    """A requested object would exceed the configured size cap."""


class ForbiddenEigenvalueError(ValueError):
    """An eigenvalue sits at a forbidden value (0, 1 or N) where a recursion degenerates."""


class ConvergenceError(RuntimeError):
    """An iterative routine did not reach its tolerance."""
