"""Exception hierarchy shared across the package."""


class QFVMError(Exception):
    """Base class for all package errors."""


class GeometryError(QFVMError):
    """Degenerate or non-realizable tetrahedral geometry."""


class MeshError(QFVMError):
    """Malformed mesh input or inconsistent connectivity."""


class ParameterError(QFVMError, ValueError):
    """Scheme parameters outside their admissible range."""


class DualConstructionError(QFVMError):
    """Dual cell partition failed a consistency check."""


class SolverError(QFVMError):
    """Linear solve failed or did not converge."""


class StabilityError(QFVMError):
    """Stability analysis could not be carried out."""
