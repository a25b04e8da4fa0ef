"""Exception types shared across the package."""


class AmlocError(Exception):
    """Base class for all package-specific errors."""


class ConnectivityError(AmlocError):
    """The union graph over sensors and anchors is not connected."""


class DisconnectedError(ConnectivityError):
    """A generated topology came out disconnected; reseed or enlarge the radius."""


class FactorizationError(AmlocError):
    """The location-update system matrix is numerically not positive definite."""


class SubFactorizationError(FactorizationError):
    """A cluster principal submatrix failed to factorize (numerical breakdown)."""


class ParseError(AmlocError):
    """An instance file is malformed; message carries line/field diagnostics."""


class UnreachableError(AmlocError):
    """Some sensor has no path to any cluster head in the sensor-only graph."""


class MissingTruthError(AmlocError):
    """Ground-truth sensor positions are required but absent."""


class SingularFIMError(AmlocError):
    """The Fisher information matrix is singular (under-anchored geometry)."""
