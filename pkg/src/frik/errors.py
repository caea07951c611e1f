"""Exception types shared across the package."""


class FrikError(Exception):
    """Base class for all package-specific errors."""


class RotationNearPi(FrikError):
    """Rotation angle is within tolerance of pi, where the log map is non-unique."""


class DimensionMismatch(FrikError):
    """An array argument does not have the expected shape."""


class NotConverged(FrikError):
    """A toolpath solve failed to converge at a given target index."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"solver did not converge at target index {index}")


class OutOfLimits(FrikError):
    """A joint position lies outside the model's joint limits."""


class ParseError(FrikError):
    """A data file could not be parsed; the message carries record diagnostics."""


class InvalidRotation(FrikError):
    """An orientation record is not a valid rotation (e.g. non-unit quaternion)."""


class DegenerateProjection(FrikError):
    """No usable reference axis survives projection onto the tool plane."""
