"""Tokenizer shared by the waveform and BSP dialects."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .diagnostics import DiagCode, ParseDiagnostic, Severity, SourceSpan

INT_MAX = 2**63 - 1

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct><->|->|<=|>=|\.\.|[{}()\[\];:,=+*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "real", "ident", "string", "punct", "eof"
    text: str
    line: int
    column: int

    @property
    def value(self):
        if self.kind == "int":
            return int(self.text)
        if self.kind == "real":
            return float(self.text)
        if self.kind == "string":
            return re.sub(r"\\(.)", r"\1", self.text[1:-1])
        return self.text


def tokenize(source: str, filename: str = "<input>") -> tuple[list[Token], list[ParseDiagnostic]]:
    tokens: list[Token] = []
    diags: list[ParseDiagnostic] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            ch = source[pos]
            if ch == '"':
                msg = "unterminated string literal"
                end = source.find("\n", pos)
                length = (end if end >= 0 else len(source)) - pos
            else:
                msg = f"unexpected character {ch!r}"
                length = 1
            diags.append(ParseDiagnostic(Severity.ERROR, DiagCode.LEXICAL, msg,
                                         SourceSpan(filename, line, col, max(length, 1))))
            pos += max(length, 1)
            continue
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "int" and int(text) > INT_MAX:
            diags.append(ParseDiagnostic(Severity.ERROR, DiagCode.LEXICAL,
                                         f"integer literal {text} overflows 64 bits",
                                         SourceSpan(filename, line, col, len(text))))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens, diags
