"""Exception types raised by spike_detect."""


class SpikeDetectError(Exception):
    """Base class for all package errors."""


class DomainError(SpikeDetectError, ValueError):
    """An argument lies outside the domain of the requested function."""


class DegenerateDataError(SpikeDetectError, ValueError):
    """Observations carry no usable energy (e.g. an all-zero matrix)."""


class ConvergenceError(SpikeDetectError, RuntimeError):
    """An iterative solver hit its iteration cap."""


class GridError(SpikeDetectError, ValueError):
    """A numerical grid is too coarse or too narrow for the request."""


class ParseError(SpikeDetectError, ValueError):
    """Malformed input file. Carries 1-based line and column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
