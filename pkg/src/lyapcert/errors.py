"""Exception types shared across the package."""


class LyapcertError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LyapcertError, ValueError):
    """A point or vector does not match the system's ambient dimension."""


class DimensionUnsupported(LyapcertError, ValueError):
    """The requested operation does not support this ambient dimension."""


class CriticalPointEncountered(LyapcertError):
    """The derivative collapsed a tangent direction below the guard norm.

    The lifted dynamics are undefined wherever the Jacobian kills a
    direction, so iteration stops loudly instead of propagating garbage.
    """

    def __init__(self, message, point=None, step=None, cell=None):
        super().__init__(message)
        self.point = point
        self.step = step
        self.cell = cell


class AcyclicGraphError(LyapcertError):
    """A transition graph contains no directed cycle.

    Sampled dynamics on a partition of a compact invariant set always
    recur, so an acyclic graph signals inconsistent input.
    """


class UnsupportedSystemError(LyapcertError, ValueError):
    """The operation is only defined for a restricted class of systems."""


class DegenerateBasisError(LyapcertError, ValueError):
    """A subbundle basis failed the orthonormality check."""


class SplittingInvalidError(LyapcertError):
    """A declared splitting failed its invariance or angle checks."""


class ConfigError(LyapcertError, ValueError):
    """An experiment configuration failed validation."""
