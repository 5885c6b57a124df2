"""Exception hierarchy shared across the package."""


class PolyVEMError(Exception):
    """Base class for all errors raised by polyvem."""


class InvalidDomainError(PolyVEMError, ValueError):
    pass


class InvalidGeometryError(PolyVEMError, ValueError):
    pass


class DegenerateElementError(InvalidGeometryError):
    pass


class GeometricMismatchError(PolyVEMError):
    """Interface chains of two meshes do not coincide within tolerance."""


class InvalidMergeError(PolyVEMError):
    pass


class MeshGenerationError(PolyVEMError):
    pass


class ConditioningError(PolyVEMError):
    pass


class InsufficientOrderError(PolyVEMError):
    """Stabilization-free stiffness came out rank deficient."""


class ConfigurationError(PolyVEMError, ValueError):
    pass


class SolverError(PolyVEMError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MeshMismatchError(PolyVEMError):
    pass


class PointOutsideMeshError(PolyVEMError):
    pass


class UnsupportedMaterialError(PolyVEMError, ValueError):
    pass
