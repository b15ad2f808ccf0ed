"""Exception types shared across the pipeline."""


class CoauthorcastError(Exception):
    """Base class for all pipeline errors."""


class ParseError(CoauthorcastError, ValueError):
    """A bibliographic record or document could not be parsed.

    ``line`` is set for line-oriented formats, ``offset`` (bytes) for XML.
    """

    def __init__(self, message, *, line=None, offset=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte offset {offset}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.offset = offset
        self.reason = message


class ConfigError(CoauthorcastError, ValueError):
    """Invalid window, configuration, or an empty dataset slice."""


class FitError(CoauthorcastError, ArithmeticError):
    """A regression could not be fitted.

    ``last`` carries the final iterate (intercept, slope) when an iterative
    fit stops without converging.
    """

    def __init__(self, message, *, last=None):
        super().__init__(message)
        self.last = last


class TrainingError(CoauthorcastError):
    """The rate matrices cannot be assembled from the empirical means."""


class UndefinedStatistic(CoauthorcastError, ValueError):
    """A statistic is undefined for the input (e.g. zero variance)."""
