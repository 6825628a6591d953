"""Exception hierarchy shared by all modules."""


class SteklovLabError(Exception):
    """Base class for every error raised by the package."""


class GeometryError(SteklovLabError):
    """Invalid polygon, boundary, or domain layout."""


class ParameterError(SteklovLabError, ValueError):
    """An argument is outside its admissible range."""


class MeshQualityError(SteklovLabError):
    """The mesher could not reach the requested angle bound."""

    def __init__(self, message, min_angle=None):
        super().__init__(message)
        self.min_angle = min_angle


class MeshValidationError(SteklovLabError):
    """A mesh violates one or more structural invariants.

    ``violations`` holds one human-readable string per problem found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class AssemblyError(SteklovLabError):
    """Finite-element assembly hit a degenerate element."""


class SolverError(SteklovLabError):
    """An iterative solve did not converge."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals or [])


class SingularProblemError(SteklovLabError):
    """The requested linear problem has a nontrivial kernel."""


class NumericalQualityError(SteklovLabError):
    """A computed quantity failed a consistency check (e.g. asymmetry)."""


class MatrixError(SteklovLabError):
    """A matrix factorization failed (e.g. Cholesky of a non-SPD matrix)."""


class EigensolverError(SteklovLabError):
    """The dense eigensolver did not converge."""


class ConfigError(SteklovLabError):
    """Malformed run configuration; carries key and line when known."""

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line
