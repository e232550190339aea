"""Exception types shared across the package."""


class QavalError(Exception):
    """Base class for all qaval errors."""


class SchemaError(QavalError):
    """Invalid relation schema or unknown label/index lookup."""


class ConfigError(QavalError):
    """Invalid validation or CLI configuration."""


class ParseError(QavalError):
    """Malformed input record.

    Carries the 1-based line number of the offending record when parsing
    line-delimited files.
    """

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ScorerError(QavalError):
    """A QA scorer failed to produce a usable score."""


class ProtocolError(ScorerError):
    """Wire-protocol failure; carries the request id when one exists."""

    def __init__(self, message: str, request_id: str | None = None):
        if request_id is not None:
            message = f"request {request_id}: {message}"
        super().__init__(message)
        self.request_id = request_id


class EvalError(QavalError):
    """Evaluation inputs are inconsistent (missing gold, mismatched sets)."""
