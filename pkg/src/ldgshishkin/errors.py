"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid user-supplied configuration (mesh parameters, sweep grids, CLI input)."""


class MeshError(ValueError):
    """Degenerate or inconsistent mesh data (e.g. a cell with a <= b violated)."""


class ProjectionError(RuntimeError):
    """A local projection system could not be solved (weight lost positivity)."""


class SingularMatrixError(RuntimeError):
    """Factorization hit a zero (or below-tolerance) pivot.

    ``pivot_index`` is the 0-based index of the offending pivot when known.
    """

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class SolverError(RuntimeError):
    """Linear solve finished but did not reach the requested residual.

    ``residual`` carries the relative residual that was achieved.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
