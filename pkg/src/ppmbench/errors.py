"""Exception hierarchy shared across the engine.

The CLI maps ``ValidationError`` subclasses to exit code 1 and every other
``PpmBenchError`` to exit code 2.
"""


class PpmBenchError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PpmBenchError):
    """Bad user input: configuration, file formats, CLI arguments."""


class ConfigurationError(ValidationError):
    """Invalid or inconsistent configuration values."""


class FormatError(ValidationError):
    """A persisted artifact (split file, config file) violates its format."""


class ParseError(PpmBenchError):
    """An event-log source could not be parsed."""


class EmptyLogError(ParseError):
    """Parsing produced zero events."""


class InfeasibleSplitError(PpmBenchError):
    """The requested split cannot be materialized on this log."""


class PadOverflowError(PpmBenchError):
    """A trace does not fit the configured pad size."""


class InvalidDistributionError(PpmBenchError):
    """A probability vector violates the distribution contract."""


class ProtocolError(PpmBenchError):
    """External predictor violated the wire protocol."""


class GenerationError(PpmBenchError):
    """Suffix generation failed; carries any partial output."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
