"""Exception types raised by conic_fem."""


class ConicFemError(Exception):
    """Base class for all library errors."""


class GeometryError(ConicFemError):
    """Degenerate or inconsistent geometric input."""


class UsageError(ConicFemError):
    """Arguments that do not fit together (mismatched shapes, triangles...)."""


class MeshValidationError(ConicFemError):
    """A mesh violates one of the admissibility conditions.

    The individual violations are kept in ``violations``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid mesh")


class SolverError(ConicFemError):
    """Linear or eigenvalue solver failure."""
