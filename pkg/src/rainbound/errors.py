"""Exception hierarchy shared by all rainbound modules."""


class RainboundError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RainboundError, ValueError):
    """An input lies outside the domain where a model is defined."""


class ConfigError(RainboundError, ValueError):
    """A configuration value or input file is malformed."""


class NumericError(RainboundError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable result."""


class NoSolutionError(NumericError):
    """A bracketed root or optimum does not exist on the requested interval."""


class UndetectableError(DomainError):
    """The CUSUM drift is non-positive, so the rain rate is never detected."""


class SeriesFormatError(ConfigError):
    """A time-series file could not be parsed.

    Attributes
    ----------
    line : int or None
        1-based line number of the offending row, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
