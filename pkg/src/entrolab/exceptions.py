"""Exception hierarchy shared by every entrolab module."""


class EntrolabError(Exception):
    """Base class for all errors raised by entrolab."""


class PreconditionError(EntrolabError, ValueError):
    """An argument violates a documented precondition."""


class EscapedError(EntrolabError):
    """A planar orbit left its domain box and cannot be iterated further."""


class NotInvertibleError(EntrolabError):
    """The operation needs an inverse the map does not provide."""


class UnavailableError(EntrolabError):
    """The map lacks the structure the operation needs (e.g. a toral lift)."""


class NotPeriodicError(EntrolabError):
    """A point claimed to be periodic does not return to itself."""


class ConfigError(EntrolabError):
    """An experiment configuration failed validation."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
