"""Exception types shared across the package."""


class GkpgenError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(GkpgenError):
    """Cutoff too small or operand dimensions do not match."""


class InvalidParameterError(GkpgenError):
    """Non-finite or out-of-range parameter."""


class TruncationError(GkpgenError):
    """State support leaks past the Fock cutoff beyond tolerance."""


class ZeroProbabilityBranchError(GkpgenError):
    """A conditioning branch has (numerically) zero probability."""


class DegenerateChannelError(GkpgenError):
    """Noise channel parameters degenerate (epsilon >= 1, i.e. r0 = 0)."""


class UndefinedMetricError(GkpgenError):
    """Metric undefined for this state (e.g. vanishing displacement trace)."""


class NumericalConsistencyError(GkpgenError):
    """An internally computed quantity violates a hard bound."""


class ScheduleOverflowError(GkpgenError):
    """Beam-splitter angle schedule reached or passed 90 degrees."""


class SchemaError(GkpgenError):
    """CSV rows do not match the declared schema."""


class ConfigKeyError(GkpgenError):
    """Unknown configuration key."""


class NoiseModelError(GkpgenError):
    """Invalid QEC noise model (empty samples, non-PSD covariance, ...)."""
