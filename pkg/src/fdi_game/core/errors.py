class GameError(ValueError):
    """Base class for every error raised by the game toolkit."""


class DomainError(GameError):
    pass


class ConfigError(GameError):
    pass


class PreconditionError(GameError):
    pass


class SimulationError(GameError):
    pass


class UnsupportedPolicyError(GameError):
    pass


class DegenerateReferenceError(GameError):
    pass


class DimensionError(GameError):
    pass


class InadmissibleDeviationError(GameError):
    pass
