"""Exception types shared across the simulator."""


class RoundsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(RoundsimError):
    """Invalid experiment configuration.

    The message starts with a dotted path to the offending key when one
    exists (e.g. ``delay.min: ...``).
    """

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class UnknownAlgorithmError(ConfigError):
    """Algorithm identifier is not registered."""

    def __init__(self, name):
        super().__init__("algorithm", f"unknown algorithm {name!r}")
        self.name = name


class SimulationError(RoundsimError):
    """Illegal use of the simulation API, typically an algorithm bug."""


class MetricError(RoundsimError):
    """A metric reducer was applied to a log that cannot support it."""
