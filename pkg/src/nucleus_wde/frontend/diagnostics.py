from __future__ import annotations

import enum
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


class DiagCode(enum.Enum):
    LEXICAL = "E001"
    SYNTAX = "E002"
    DUPLICATE_ID = "E003"
    UNKNOWN_REF = "E004"
    MISSING_ATTRIBUTE = "E005"
    BAD_VALUE = "E006"
    CYCLE = "E007"
    PATH_NOT_CONNECTED = "E008"
    UNKNOWN_PE = "E009"
    DUPLICATE_LINK = "E010"
    UNKNOWN_ATTRIBUTE = "E011"
    ISOLATED_KERNEL = "W001"


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: Severity
    code: DiagCode
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.severity.value}[{self.code.value}]: {self.message}"


class FrontendError(Exception):
    """Raised when a source text produces at least one error diagnostic."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        super().__init__("\n".join(str(d) for d in errors))
