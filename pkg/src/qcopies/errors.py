"""Exception types shared across the package."""


class QcopiesError(ValueError):
    """Base class for all domain errors raised by this package."""


class DimensionMismatchError(QcopiesError):
    """Operands have incompatible dimensions."""


class DegenerateProblemError(QcopiesError):
    """Allocation problem has no variance anywhere (all weights zero)."""


class InfeasibleAfterRelaxationError(QcopiesError):
    """Relaxed allocation failed the original bilinear constraint."""


class ConfigError(QcopiesError):
    """Invalid experiment configuration."""
