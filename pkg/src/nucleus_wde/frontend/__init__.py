"""Lexer, parser and pretty-printer for the waveform and BSP dialects."""

from .diagnostics import DiagCode, FrontendError, ParseDiagnostic, Severity, SourceSpan
from .parser import check_bsp, check_waveform, parse_bsp, parse_waveform
from .printer import pretty_print

__all__ = [
    "DiagCode", "FrontendError", "ParseDiagnostic", "Severity", "SourceSpan",
    "check_bsp", "check_waveform", "parse_bsp", "parse_waveform", "pretty_print",
]
