"""Parser for the application architecture language (``*.arch.mydsl``)."""

from __future__ import annotations

from ..model import (
    COMMON_OPERATORS,
    ArchitectureSpec,
    CommandDecl,
    ComputeDecl,
    ConsumeDecl,
    GenerateDecl,
    NameRef,
    Scope,
    ServiceDecl,
    ServiceKind,
)
from .base import Parser, _Bail
from .domain import RecordParserMixin
from .lexer import TokenKind


class ArchitectureParser(RecordParserMixin, Parser):
    def parse(self) -> ArchitectureSpec:
        self.services: list[ServiceDecl] = []
        try:
            self.expect("computationalServices")
            self.block(self.service)
            self.finish()
        except _Bail:
            pass
        spec = ArchitectureSpec(tuple(self.services))
        seen = set()
        for s in spec.services:
            if s.name in seen:
                self.report(s.span, "DuplicateService", f"service {s.name!r} declared twice")
            seen.add(s.name)
        return spec

    def service(self):
        kind_tok = self.peek()
        if not (self.at("Common") or self.at("Custom")):
            self.error("expected 'Common' or 'Custom'")
        self.advance()
        kind = ServiceKind(kind_tok.text)
        name = self.ident("service name")
        consumes: list[ConsumeDecl] = []
        computes: list[ComputeDecl] = []
        requests: list[NameRef] = []
        generates: list[GenerateDecl] = []
        commands: list[CommandDecl] = []

        def stmt():
            tok = self.peek()
            if self.accept("consume"):
                event = self.ident("event name")
                scope = Scope.SAME_LOCATION
                if self.accept("from"):
                    if self.accept("global"):
                        scope = Scope.GLOBAL
                    elif not self.accept("region"):
                        self.error("expected 'region' or 'global'")
                consumes.append(ConsumeDecl(event.text, scope, event.span))
            elif self.accept("COMPUTE"):
                op = self.peek()
                if not (op.kind is TokenKind.KEYWORD and op.text in COMMON_OPERATORS):
                    self.error("expected AVG_BY_SAMPLE, SUM_BY_SAMPLE or COUNT_BY_SAMPLE")
                self.advance()
                self.expect("(")
                window, wtok = self.number()
                if not isinstance(window, int) or window < 1:
                    self.report(wtok.span, "BadWindow", "window size must be a positive integer")
                    window = 1
                self.expect(")")
                self.expect("on")
                fld = self.ident("field name")
                computes.append(ComputeDecl(op.text, int(window), fld.text, tok.span, fld.span))
            elif self.accept("request"):
                target = self.ident("request target")
                requests.append(NameRef(target.text, target.span))
            elif self.accept("generate"):
                generates.append(self.generate_clause())
            elif self.accept("command"):
                action = self.ident("action name")
                self.expect("(")
                args = []
                if not self.at(")"):
                    args.append(self.expression())
                    while self.accept(","):
                        args.append(self.expression())
                self.expect(")")
                self.expect("to")
                target = self.ident("actuator name")
                commands.append(CommandDecl(action.text, target.text, tuple(args),
                                            action.span, target.span))
            else:
                self.error("expected consume, COMPUTE, request, generate or command")
            self.expect(";")

        self.block(stmt)

        if kind is ServiceKind.COMMON:
            if not computes:
                self.report(name.span, "MissingCompute",
                            f"Common service {name.text!r} needs a COMPUTE clause")
            if len(consumes) != 1 or len(generates) != 1:
                self.report(name.span, "CommonShape",
                            f"Common service {name.text!r} must consume exactly one event "
                            f"and generate exactly one event")
        elif computes:
            self.report(computes[0].span, "UnexpectedCompute",
                        f"Custom service {name.text!r} cannot have a COMPUTE clause")
        if len(computes) > 1:
            self.report(computes[1].span, "DuplicateClause", "COMPUTE given twice")
        produced = {g.event for g in generates}
        for c in consumes:
            if c.event in produced:
                self.report(c.span, "SelfLoop",
                            f"service {name.text!r} consumes {c.event!r}, which it generates itself")
        self.services.append(ServiceDecl(
            name.text, kind, tuple(consumes),
            computes[0] if computes and kind is ServiceKind.COMMON else None,
            tuple(requests), tuple(generates), tuple(commands), name.span))


def parse_architecture(text: str, file: str = "app.arch.mydsl"):
    """Parse architecture text. Returns ``(ArchitectureSpec | None, diagnostics)``."""
    p = ArchitectureParser(text, file)
    spec = p.parse()
    return (None if p.failed else spec), p.diagnostics
