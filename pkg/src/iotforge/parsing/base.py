"""Recursive-descent machinery: token cursor, diagnostics, recovery, expressions."""

from __future__ import annotations

from ..model import (
    BINARY_PRECEDENCE,
    PRIMITIVE_TYPES,
    Binary,
    Diagnostic,
    FieldRef,
    Literal,
    Severity,
    SourceSpan,
    Unary,
)
from .lexer import Token, TokenKind, tokenize, unquote

FIELD_ROOTS = ("event", "state", "response")


class _Bail(Exception):
    """Unwinds to the nearest recovery point after a diagnostic was recorded."""


class Parser:
    def __init__(self, text: str, file: str):
        self.text = text.replace("\r\n", "\n")
        self.file = file
        self.diagnostics: list[Diagnostic] = []
        self._eof_reported = False
        self.tokens: list[Token] = []
        for tok in tokenize(self.text, file):
            if tok.kind is TokenKind.COMMENT:
                continue
            if tok.kind is TokenKind.ERROR:
                if tok.text.startswith('"'):
                    self._diag(tok.span, "UnterminatedString", "unterminated string literal")
                else:
                    self._diag(tok.span, "BadCharacter", f"unexpected character {tok.text!r}")
                continue
            self.tokens.append(tok)
        self.pos = 0

    # -- diagnostics ----------------------------------------------------------

    def _diag(self, span: SourceSpan, code: str, message: str, severity=Severity.ERROR):
        self.diagnostics.append(Diagnostic(severity, code, message, span))

    def error(self, message: str, code: str = "Syntax", tok: Token | None = None):
        tok = tok or self.peek()
        if tok.kind is TokenKind.EOF:
            if self._eof_reported:
                raise _Bail()
            self._eof_reported = True
            if code == "Syntax":
                code = "UnexpectedEOF"
            message = f"unexpected end of input, {message}"
        else:
            message = f"{message}, found {tok.text!r}"
        self._diag(tok.span, code, message)
        raise _Bail()

    def report(self, span: SourceSpan, code: str, message: str):
        """Record a non-syntactic error without unwinding."""
        self._diag(span, code, message)

    @property
    def failed(self) -> bool:
        return any(d.is_error for d in self.diagnostics)

    # -- cursor ---------------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    @property
    def previous(self) -> Token:
        return self.tokens[max(self.pos - 1, 0)]

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in (TokenKind.KEYWORD, TokenKind.PUNCT) and tok.text == text

    def at_eof(self) -> bool:
        return self.peek().kind is TokenKind.EOF

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str, code: str = "Syntax") -> Token:
        if self.at(text):
            return self.advance()
        self.error(f"expected '{text}'", code)

    def ident(self, what: str = "identifier") -> Token:
        if self.peek().kind is TokenKind.IDENT:
            return self.advance()
        self.error(f"expected {what}")

    def type_name(self) -> Token:
        tok = self.peek()
        if tok.kind is TokenKind.KEYWORD and tok.text in PRIMITIVE_TYPES:
            return self.advance()
        self.error("expected a type (double, long or String)")

    def number(self) -> tuple[float | int, Token]:
        negative = self.accept("-")
        tok = self.peek()
        if tok.kind is not TokenKind.NUMBER:
            self.error("expected a number")
        self.advance()
        value = _number_value(tok.text)
        return (-value if negative else value), tok

    def span_from(self, start: Token) -> SourceSpan:
        end = self.previous.end if self.pos > 0 else start.end
        return SourceSpan(self.file, start.span.line, start.span.column, max(end - start.offset, 0))

    # -- recovery -------------------------------------------------------------

    def recover(self):
        """Skip to the end of the broken statement or declaration.

        Stops after a ``;`` or a balanced ``{...}`` group at the current depth,
        and before a ``}`` that closes the enclosing block.
        """
        depth = 0
        while not self.at_eof():
            tok = self.peek()
            if tok.is_(TokenKind.PUNCT, "}"):
                if depth == 0:
                    return
                depth -= 1
                self.advance()
                if depth == 0:
                    return
                continue
            if tok.is_(TokenKind.PUNCT, "{"):
                depth += 1
            elif tok.is_(TokenKind.PUNCT, ";") and depth == 0:
                self.advance()
                return
            self.advance()

    def block(self, item, opener: Token | None = None):
        """Parse ``'{' item* '}'``, recovering per item."""
        self.expect("{")
        while not self.at("}"):
            if self.at_eof():
                self.error("expected '}'")
            before = self.pos
            try:
                item()
            except _Bail:
                self.recover()
                if self.pos == before and not self.at("}"):
                    self.advance()
        self.expect("}")

    def finish(self):
        if not self.at_eof():
            self.error("expected end of input")

    # -- expressions ----------------------------------------------------------

    def expression(self):
        return self._binary(1)

    def _binary(self, min_prec: int):
        start = self.peek()
        left = self._unary()
        while True:
            tok = self.peek()
            prec = BINARY_PRECEDENCE.get(tok.text) if tok.kind is TokenKind.PUNCT else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self._binary(prec + 1)
            left = Binary(tok.text, left, right, self.span_from(start))

    def _unary(self):
        start = self.peek()
        if self.accept("!"):
            operand = self._unary()
            return Unary("!", operand, self.span_from(start))
        if self.accept("-"):
            operand = self._unary()
            if isinstance(operand, Literal) and operand.type in ("long", "double") \
                    and not _negative(operand.value):
                return Literal(-operand.value, operand.type, self.span_from(start))
            return Unary("-", operand, self.span_from(start))
        return self._primary()

    def _primary(self):
        tok = self.peek()
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            value = _number_value(tok.text)
            return Literal(value, "double" if isinstance(value, float) else "long", tok.span)
        if tok.kind is TokenKind.STRING:
            self.advance()
            return Literal(unquote(tok.text), "String", tok.span)
        if tok.is_(TokenKind.KEYWORD, "true") or tok.is_(TokenKind.KEYWORD, "false"):
            self.advance()
            return Literal(tok.text == "true", "bool", tok.span)
        if tok.is_(TokenKind.PUNCT, "("):
            self.advance()
            inner = self.expression()
            if not self.at(")"):
                self.error("expected ')' to close '('", "UnbalancedParen")
            self.advance()
            return inner
        if tok.kind is TokenKind.IDENT or tok.is_(TokenKind.KEYWORD, "response"):
            self.advance()
            if self.accept("."):
                if tok.text not in FIELD_ROOTS:
                    self.error(f"unknown field root {tok.text!r}; expected event, state or response",
                               "BadFieldRef", tok)
                name = self.ident("field name")
                return FieldRef(tok.text, name.text, self.span_from(tok))
            if tok.kind is TokenKind.KEYWORD:
                self.error("expected '.' after 'response'")
            return FieldRef(None, tok.text, tok.span)
        self.error("expected an expression")


def _number_value(text: str):
    if any(c in text for c in ".eE"):
        return float(text)
    return int(text)


def _negative(value) -> bool:
    return value < 0 or (isinstance(value, float) and str(value).startswith("-"))


def parse_expr(text: str, file: str = "<expr>"):
    """Parse a standalone expression. Returns ``(expr | None, diagnostics)``."""
    p = Parser(text, file)
    expr = None
    try:
        expr = p.expression()
        p.finish()
    except _Bail:
        expr = None
    if p.failed:
        expr = None
    return expr, p.diagnostics
