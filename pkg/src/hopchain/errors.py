"""Exception hierarchy shared across the engine.

The CLI maps these onto exit codes: ConfigError -> 3, everything else
raised from file handling (FormatError, OSError) -> 4.
"""


class EngineError(Exception):
    """Base class for all engine-raised errors."""


class FormatError(EngineError):
    """Malformed input file. Carries a line number when one is known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateIdError(FormatError):
    """An identifier appeared twice where uniqueness is required."""


class ConfigError(EngineError):
    """Invalid configuration or unsatisfied precondition."""


class DimensionError(EngineError):
    """Embedding or parameter shapes do not line up."""


class DivergenceError(EngineError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")
        self.epoch = epoch
