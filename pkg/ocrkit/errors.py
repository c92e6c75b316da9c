"""Exceptions raised across ocrkit.

Every error derives from `OcrkitError` and from the builtin that best
describes it, so callers can catch either.
"""

from typing import Optional


class OcrkitError(Exception):
    """Base class for all ocrkit errors."""


class DegenerateGeometry(OcrkitError, ValueError):
    """A quad or polygon has no usable area or an unsolvable mapping."""


class DuplicateEngine(OcrkitError, ValueError):
    """An engine kind was registered twice."""


class NoEngineAvailable(OcrkitError, RuntimeError):
    """The engine registry is empty."""


class ShapeMismatch(OcrkitError, ValueError):
    """A tensor does not conform to its declared spec."""


class EngineFailure(OcrkitError, RuntimeError):
    """An inference engine could not produce outputs."""

    def __init__(self, message: str, model: str = "", key: str = ""):
        super().__init__(message)
        self.model = model
        self.key = key


class ConfigError(OcrkitError, ValueError):
    """Configuration is invalid, incomplete or references unknown models."""

    def __init__(self, message: str, field: str = "", line: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.field = field
        self.line = line


class InputError(OcrkitError, OSError):
    """An input image or PDF is missing or cannot be decoded."""


class StructureMismatch(OcrkitError, ValueError):
    """Table structure tokens and detected cells disagree."""


class FormulaInvalid(OcrkitError, ValueError):
    """Recognized LaTeX failed validation."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class ChartInvalid(OcrkitError, ValueError):
    """Recognized chart text is not a well-formed pipe table."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class EmbedderFailure(OcrkitError, RuntimeError):
    """An embedder failed or returned inconsistent vectors."""


class ClientFailure(OcrkitError, RuntimeError):
    """A language-model client failed.

    `path` names the extraction path that failed: "text" or "image".
    """

    def __init__(self, message: str, path: str = "text"):
        super().__init__(message)
        self.path = path


class KeyMismatch(OcrkitError, ValueError):
    """Two answer sets or an answer set and its ground truth disagree on keys."""


class EmptyBenchmark(OcrkitError, ValueError):
    """A benchmark was run with no cases."""
