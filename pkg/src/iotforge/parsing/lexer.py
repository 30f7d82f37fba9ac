"""Tokenizer shared by the five specification languages.

The token stream is lossless: every input character belongs either to a token
(comments included) or to inter-token whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..model import SourceSpan


class TokenKind(str, Enum):
    IDENT = "Ident"
    KEYWORD = "Keyword"
    NUMBER = "Number"
    STRING = "StringLit"
    PUNCT = "Punct"
    COMMENT = "Comment"
    ERROR = "Error"
    EOF = "EOF"


KEYWORDS = frozenset({
    # domain
    "resources", "structs", "tags", "sensors", "periodicSensors", "eventDrivenSensors",
    "requestBasedSensors", "actuators", "storages", "generate", "action", "accessed-by",
    "sample", "period", "for", "onCondition",
    # architecture
    "computationalServices", "Common", "Custom", "consume", "from", "region", "global",
    "request", "to", "command", "COMPUTE", "on",
    "AVG_BY_SAMPLE", "SUM_BY_SAMPLE", "COUNT_BY_SAMPLE",
    # user interaction
    "userInteractions", "notify",
    # deployment
    "devices", "location", "protocol", "database", "language-platform",
    # rules
    "service", "when", "response", "emit", "set",
    # types and literals
    "double", "long", "String", "true", "false",
})

HYPHEN_KEYWORDS = {"accessed": "accessed-by", "language": "language-platform"}

PUNCTUATION = (
    "->", "<=", ">=", "==", "!=", "&&", "||",
    "{", "}", "(", ")", ";", ":", ",", ".", "=", "<", ">", "!", "+", "-", "*", "/",
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)

    def is_(self, kind: TokenKind, text: str | None = None) -> bool:
        return self.kind is kind and (text is None or self.text == text)


def _ident_start(c: str) -> bool:
    return c.isascii() and (c.isalpha() or c == "_")


def _ident_char(c: str) -> bool:
    return c.isascii() and (c.isalnum() or c in "_#")


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    """Split ``text`` into tokens, ending with a single EOF token.

    Unrecognised characters and unterminated strings become ERROR tokens; the
    parser turns those into diagnostics.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)

    def emit(kind, start, end):
        tokens.append(Token(kind, text[start:end],
                            SourceSpan(file, line, start - line_start + 1, end - start), start))

    while pos < n:
        c = text[pos]
        if c == "\n":
            pos += 1
            line += 1
            line_start = pos
            continue
        if c in " \t\r\f\v":
            pos += 1
            continue
        start = pos
        if text.startswith("//", pos):
            end = text.find("\n", pos)
            if end < 0:
                end = n
            if end > pos and text[end - 1] == "\r":
                end -= 1
            emit(TokenKind.COMMENT, start, end)
            pos = end
            continue
        if _ident_start(c):
            pos += 1
            while pos < n and _ident_char(text[pos]):
                pos += 1
            word = text[start:pos]
            joined = HYPHEN_KEYWORDS.get(word)
            if joined and text.startswith(joined, start):
                after = start + len(joined)
                if after >= n or not _ident_char(text[after]):
                    pos = after
                    word = joined
            emit(TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT, start, pos)
            continue
        if c.isdigit():
            while pos < n and text[pos].isdigit():
                pos += 1
            if pos + 1 < n and text[pos] == "." and text[pos + 1].isdigit():
                pos += 1
                while pos < n and text[pos].isdigit():
                    pos += 1
            if pos < n and text[pos] in "eE":
                probe = pos + 1
                if probe < n and text[probe] in "+-":
                    probe += 1
                if probe < n and text[probe].isdigit():
                    pos = probe
                    while pos < n and text[pos].isdigit():
                        pos += 1
            emit(TokenKind.NUMBER, start, pos)
            continue
        if c == '"':
            pos += 1
            closed = False
            while pos < n and text[pos] != "\n":
                if text[pos] == "\\" and pos + 1 < n and text[pos + 1] != "\n":
                    pos += 2
                    continue
                if text[pos] == '"':
                    pos += 1
                    closed = True
                    break
                pos += 1
            emit(TokenKind.STRING if closed else TokenKind.ERROR, start, pos)
            continue
        for p in PUNCTUATION:
            if text.startswith(p, pos):
                pos += len(p)
                emit(TokenKind.PUNCT, start, pos)
                break
        else:
            pos += 1
            emit(TokenKind.ERROR, start, pos)

    tokens.append(Token(TokenKind.EOF, "", SourceSpan(file, line, pos - line_start + 1, 0), pos))
    return tokens


def unquote(literal: str) -> str:
    """Decode a string literal token, including its surrounding quotes."""
    body = literal[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def quote(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'
