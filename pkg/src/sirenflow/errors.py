"""Exception types raised across the package."""


class SirenflowError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SirenflowError, ValueError):
    """Invalid configuration or argument values."""


class EmptyInput(ConfigError):
    """An input collection that must be non-empty is empty."""


class FluidCoordOutsideMask(ConfigError):
    """A fluid training coordinate does not index a fluid voxel."""


class NotEnoughPoints(ConfigError):
    """Requested more points than are available."""


class EmptySampleSet(ConfigError):
    """Loss evaluation requires at least one training row."""


class NumericError(SirenflowError):
    """A numerical routine failed (non-finite values, diverging solve)."""


class NonFiniteObjective(NumericError):
    """The objective returned NaN or infinity."""


class NotDivisible(ConfigError):
    """Frame count is not divisible by the temporal pooling factor."""


class DegenerateGrid(ConfigError):
    """Grid specification has non-positive dims or spacing."""


class VencExceeded(ConfigError):
    """A velocity component reaches or exceeds the encoding limit."""


class OddDims(ConfigError):
    """Spectral truncation requires even grid dimensions."""


class InfeasibleBudget(ConfigError):
    """Sampling budget cannot accommodate the calibration block."""


class ZeroReference(ConfigError):
    """Reference field has zero maximum speed; metrics are undefined."""


class AllPointsDegenerate(NumericError):
    """Every evaluation point fell below the direction-error speed floor."""


class OutsideDomain(ConfigError):
    """A probe point lies outside the sampler's domain."""


class TooFewSamples(ConfigError):
    """Fewer samples than the local neighborhood size."""


class BadSpec(ConfigError):
    """Malformed phantom or grid specification."""


class IoError(SirenflowError):
    """File format or I/O failure."""
