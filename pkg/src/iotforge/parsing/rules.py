"""Parser for the logic-rule language (``*.rules``).

    service Proximity {
      on badgeDetected -> request ProfileDB(event.badgeID);
      on response profile -> emit tempPref(tempValue = response.preferredTemp);
    }
"""

from __future__ import annotations

from ..model import (
    Assign,
    Command,
    Emit,
    LogicRuleSet,
    Notify,
    Request,
    Rule,
    ServiceRules,
    SetState,
    Trigger,
)
from .base import Parser, _Bail


class RulesParser(Parser):
    def parse(self) -> LogicRuleSet:
        self.services: list[ServiceRules] = []
        while not self.at_eof():
            before = self.pos
            try:
                self.service_block()
            except _Bail:
                self.recover()
                if self.pos == before:
                    self.advance()
        seen = set()
        for s in self.services:
            if s.service in seen:
                self.report(s.span, "DuplicateServiceRules", f"rules for {s.service!r} given twice")
            seen.add(s.service)
        return LogicRuleSet(tuple(self.services))

    def service_block(self):
        start = self.expect("service")
        name = self.ident("service name")
        rules: list[Rule] = []
        self.block(lambda: rules.append(self.rule()))
        source = self.text[start.offset:self.previous.end]
        self.services.append(ServiceRules(name.text, tuple(rules), name.span, source + "\n"))

    def rule(self) -> Rule:
        start = self.expect("on")
        kind = "response" if self.accept("response") else "event"
        name = self.ident("event or response name")
        trigger = Trigger(kind, name.text, name.span)
        guard = None
        if self.accept("when"):
            guard = self.expression()
        self.expect("->")
        actions = [self.action()]
        while self.accept(","):
            actions.append(self.action())
        self.expect(";")
        return Rule(trigger, guard, tuple(actions), self.span_from(start))

    def action(self):
        tok = self.peek()
        if self.accept("emit"):
            event = self.ident("event name")
            return Emit(event.text, self.assigns(), event.span)
        if self.accept("command"):
            actuator = self.ident("actuator name")
            self.expect(".")
            action = self.ident("action name")
            return Command(actuator.text, action.text, self.assigns(), actuator.span)
        if self.accept("request"):
            target = self.ident("request target")
            self.expect("(")
            key = self.expression()
            self.expect(")")
            return Request(target.text, key, target.span)
        if self.accept("notify"):
            target = self.ident("interactor name")
            return Notify(target.text, self.assigns(), target.span)
        if self.accept("set"):
            fld = self.ident("state field name")
            self.expect("=")
            return SetState(fld.text, self.expression(), fld.span)
        self.error("expected emit, command, request, notify or set", tok=tok)

    def assigns(self) -> tuple[Assign, ...]:
        self.expect("(")
        out: list[Assign] = []
        if not self.at(")"):
            while True:
                name = self.ident("field or parameter name")
                self.expect("=")
                expr = self.expression()
                if any(a.name == name.text for a in out):
                    self.report(name.span, "DuplicateAssign", f"{name.text!r} assigned twice")
                out.append(Assign(name.text, expr, name.span))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(out)


def parse_logic_rules(text: str, file: str = "app.rules"):
    """Parse rule text. Returns ``(LogicRuleSet | None, diagnostics)``."""
    p = RulesParser(text, file)
    spec = p.parse()
    return (None if p.failed else spec), p.diagnostics
