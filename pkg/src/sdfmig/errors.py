"""Exception hierarchy shared by all sdfmig modules."""


class SdfmigError(Exception):
    """Base class for every error raised by this package."""


class InconsistentGraphError(SdfmigError):
    """The balance equations of the graph admit only the zero solution."""

    def __init__(self, message: str, channels: tuple = ()):
        super().__init__(message)
        self.channels = tuple(channels)


class DeadlockError(SdfmigError):
    """Execution reached a state where no actor can ever fire again."""


class StateSpaceBudgetExceededError(SdfmigError):
    """The execution explored more states than the configured budget."""


class NotHomogeneousError(SdfmigError):
    """Cycle-mean analysis requires all channel rates to be 1."""


class NotStronglyConnectedError(SdfmigError):
    """Cycle-mean analysis requires a strongly connected graph."""


class UnmappedActorError(SdfmigError):
    """A software actor has no tile (or no TDMA slice) assigned."""


class SliceOverflowError(SdfmigError):
    """TDMA slices on a tile exceed the tile's wheel size."""


class BufferTooSmallError(SdfmigError):
    """A channel buffer cannot even hold the channel's initial tokens."""


class SameTileError(SdfmigError):
    """Remote binding requested for a channel whose endpoints share a tile."""


class UnknownActorError(SdfmigError):
    """An operation referenced an actor id that is not in the graph."""


class AlreadyHardwareError(SdfmigError):
    """Migration requested for an actor that is not a software actor."""


class ScenarioParseError(SdfmigError):
    """Scenario file is not well-formed or uses unknown elements."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column if column is not None else '?'})"
        super().__init__(message)
        self.line = line
        self.column = column


class ScenarioValidationError(SdfmigError):
    """Scenario file parsed but its contents violate model invariants."""

    def __init__(self, message: str, diagnostics: tuple = ()):
        super().__init__(message)
        self.diagnostics = tuple(diagnostics)
