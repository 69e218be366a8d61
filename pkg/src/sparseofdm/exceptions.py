"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(SimulationError, ValueError):
    """A configuration object or argument is invalid."""


class DimensionError(SimulationError, ValueError):
    """Array shapes or problem dimensions are inconsistent."""


class DegenerateDictionaryError(SimulationError, ValueError):
    """A delay set produced a rank-deficient pulse or dictionary matrix."""


class UndefinedInputError(SimulationError, ValueError):
    """The requested quantity is undefined for this input (e.g. an all-zero vector)."""
