"""Exception types raised across the package."""


class DimensionError(ValueError):
    """A vector or matrix does not match the robot's joint count."""


class ModelError(ValueError):
    """A robot description violates a physical invariant."""


class UnreachableError(ValueError):
    """An IK target lies outside the arm's workspace."""


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate.

    ``field`` holds the dotted path of the offending entry when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class SimulationError(RuntimeError):
    """The integrated state became non-finite."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t
