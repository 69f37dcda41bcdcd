"""Exception types raised across the package."""


class ConsensusError(Exception):
    """Base class for all package errors."""


# graph
class GraphError(ConsensusError, ValueError):
    pass


class SelfLoopError(GraphError):
    pass


class NodeOutOfRangeError(GraphError):
    pass


class EmptyGraphError(GraphError):
    pass


class NotConnectedError(GraphError):
    pass


# numerics
class NumericsError(ConsensusError):
    pass


class NotSymmetricError(NumericsError, ValueError):
    pass


class NoConvergenceError(NumericsError):
    pass


class KernelMismatchError(NumericsError, ValueError):
    pass


class NotStabilizableError(NumericsError, ValueError):
    pass


class NoStableSubspaceError(NumericsError):
    pass


class SingularPencilError(NumericsError, ValueError):
    pass


class ResidualTooLargeError(NumericsError):
    pass


# costs / control
class GridTooCoarseError(ConsensusError, ValueError):
    pass


class NonPositiveGainError(ConsensusError, ValueError):
    pass


class NonNegativeGainError(ConsensusError, ValueError):
    pass


class ConfigError(ConsensusError, ValueError):
    """Invalid simulation or scenario configuration."""
