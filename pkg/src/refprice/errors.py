"""Exception types raised across the package."""


class InvalidInput(ValueError):
    """An argument violates an operation's precondition."""


class NoAdmissibleBids(ValueError):
    """Every bid was excluded by the admissibility band."""


class DegenerateSample(ValueError):
    """A sample statistic sits on (or beyond) a support endpoint."""


class ParseError(ValueError):
    """A row of an input file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UsageError(ValueError):
    """A CLI command was invoked without the inputs it needs."""
