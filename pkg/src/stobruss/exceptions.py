"""Exception hierarchy shared by every module."""


class StobrussError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(StobrussError, ValueError):
    pass


class IntegrationFault(StobrussError, RuntimeError):
    """A time integrator produced a non-finite state.

    ``step`` and ``time`` locate the failure; ``location`` is the grid index
    (or mode index) of the first offending entry when known.
    """

    def __init__(self, message, step=None, time=None, location=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.location = location


class ConsistencyError(StobrussError, RuntimeError):
    """An analytic certificate disagrees with the computed spectrum."""


class NonCommutingError(InvalidArgumentError):
    pass


class ModeTruncationError(InvalidArgumentError):
    """The dispersion maximiser sits on the truncation boundary."""


class DegenerateTrajectoryError(InvalidArgumentError):
    """A trajectory hit the origin, so its log-norm is undefined."""


class ConfigError(StobrussError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
