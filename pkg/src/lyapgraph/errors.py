"""Exception hierarchy.

Each family maps onto one command-line exit code.
"""


class LyapgraphError(Exception):
    exit_code = 1


class ConfigError(LyapgraphError):
    """Malformed input: unknown graph kind, bad parameter, unparsable file."""

    exit_code = 2


class SpecParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AsymmetricGraphError(ConfigError):
    def __init__(self, message, pair=None):
        self.pair = pair
        super().__init__(message)


class PreconditionError(LyapgraphError):
    """A valid request whose mathematical preconditions do not hold."""

    exit_code = 3


class BoundaryVertexError(PreconditionError):
    pass


class DepthInsufficientError(PreconditionError):
    pass


class CapacityError(PreconditionError):
    pass


class DisconnectedError(PreconditionError):
    pass


class NotWSSError(PreconditionError):
    pass


class NumericalError(LyapgraphError):
    exit_code = 4


class ConvergenceError(NumericalError):
    def __init__(self, message, residuals=None):
        self.residuals = residuals
        super().__init__(message)


class FunctionalOverflowError(NumericalError):
    def __init__(self, message, n_overflow=0):
        self.n_overflow = n_overflow
        super().__init__(message)


class InvariantViolation(LyapgraphError):
    exit_code = 5
