"""Exception types shared across the toolkit."""


class IgnifrontError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(IgnifrontError):
    """A parameter or config block violates its domain."""


class ConstructionError(IgnifrontError):
    """A constructed object failed one of its contract invariants."""


class IntegrationError(IgnifrontError):
    """The PDE integrator refused to step or produced non-finite values."""


class CalibrationError(IgnifrontError):
    """A calibration run did not satisfy its assumptions."""


class NumericError(IgnifrontError):
    """A numerical routine failed to converge or bracket."""
