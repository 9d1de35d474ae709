"""Exception and warning classes shared by every pipeline stage."""

from __future__ import annotations


class OcrFixError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(OcrFixError, ValueError):
    """A file could not be decoded into the expected structure."""


class VersionMismatch(ParseError):
    pass


class DuplicateSource(ParseError):
    def __init__(self, source: str, line_number: int):
        super().__init__(f"duplicate rule source {source!r} on line {line_number}")
        self.source = source
        self.line_number = line_number


class ValidationError(OcrFixError, ValueError):
    """A structurally valid object breaks one or more invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(f"{v.path}: {v.rule} ({v.message})" for v in self.violations)
        super().__init__(msg or "invalid document")


class InsufficientData(OcrFixError, ValueError):
    pass


class EmptyInput(OcrFixError, ValueError):
    pass


class EmptyTrainingSet(OcrFixError, ValueError):
    pass


class EmptyReference(OcrFixError, ValueError):
    pass


class PageCountMismatch(OcrFixError, ValueError):
    pass


class LabelMismatch(OcrFixError, ValueError):
    pass


class MissingRecord(OcrFixError, KeyError):
    def __init__(self, page_number: int, line_id: str):
        super().__init__(f"no sidecar record for page {page_number}, line {line_id!r}")
        self.page_number = page_number
        self.line_id = line_id

    def __str__(self):
        return self.args[0]


class ProcessFailure(OcrFixError, RuntimeError):
    def __init__(self, message: str, returncode: int | None = None, stderr: str = ""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


class ProtocolError(OcrFixError, RuntimeError):
    pass


class ConfigError(OcrFixError, ValueError):
    pass


class OcrFixWarning(UserWarning):
    pass


class EmptyPageWarning(OcrFixWarning):
    pass


class MissingGeometryWarning(OcrFixWarning):
    pass


class DegenerateCorpusWarning(OcrFixWarning):
    pass


class TokenCountDriftWarning(OcrFixWarning):
    pass
