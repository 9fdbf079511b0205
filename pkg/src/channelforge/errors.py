"""Exception hierarchy shared by every module."""


class ChannelForgeError(Exception):
    """Base class for all library errors."""


class ShapeError(ChannelForgeError, ValueError):
    """Operand dimensions are inconsistent."""


class SizeLimitError(ChannelForgeError):
    """A dense object would exceed the configured dimension cap."""


class ContractError(ChannelForgeError, ValueError):
    """A precondition of an operation was violated."""


class CircuitError(ChannelForgeError, ValueError):
    """A circuit is structurally invalid."""

    def __init__(self, message, path=None):
        self.message = message
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class CircuitParseError(CircuitError):
    """A circuit or channel document could not be decoded."""


class SolverError(ChannelForgeError):
    """An SDP solve did not reach the requested certified accuracy.

    ``lower`` and ``upper`` carry the best certified bounds found, when any.
    """

    def __init__(self, message, lower=None, upper=None, iterations=None):
        self.lower = lower
        self.upper = upper
        self.iterations = iterations
        super().__init__(message)
