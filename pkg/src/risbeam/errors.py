"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Argument has the wrong shape, is non-finite, or violates a precondition."""


class DegenerateGeometryError(ValueError):
    """Two nodes of a scenario coincide, so link angles are undefined."""


class ContractViolationError(RuntimeError):
    """An optimizer routine was called in a swarm state it does not handle."""


class ConfigError(Exception):
    """Base class for configuration problems."""


class ConfigNotFoundError(ConfigError, FileNotFoundError):
    pass


class ConfigParseError(ConfigError):
    pass


class ConfigValidationError(ConfigError):
    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)
