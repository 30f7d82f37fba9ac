"""Whole-project cross checks and the dataflow graph.

Error codes V1-V11 and W1 are listed in docs/grammar.md. V10/V11 cover rule
wiring, and W1 flags events nobody consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .errors import InvalidProject
from .model import (
    ArchitectureSpec,
    Binary,
    Command,
    DeploymentSpec,
    Diagnostic,
    DomainSpec,
    Emit,
    FieldRef,
    Literal,
    LogicRuleSet,
    Notify,
    RecordTypeDecl,
    Request,
    SensorKind,
    ServiceDecl,
    ServiceKind,
    SetState,
    Severity,
    SourceSpan,
    StorageDecl,
    Unary,
    UserInteractionSpec,
    event_producers,
    has_errors,
)

NUMERIC = ("long", "double")


@dataclass(frozen=True)
class Project:
    domain: DomainSpec
    arch: ArchitectureSpec
    deploy: DeploymentSpec
    ui: Optional[UserInteractionSpec] = None
    rules: LogicRuleSet = field(default_factory=LogicRuleSet)

    def record(self, name: str) -> Optional[RecordTypeDecl]:
        if self.ui is not None:
            for r in self.ui.records:
                if r.name == name:
                    return r
        return self.domain.record(name)

    @property
    def interactors(self):
        return self.ui.interactors if self.ui is not None else ()

    def event_types(self) -> dict[str, str]:
        """Published event name -> record type name (first declaration wins)."""
        out: dict[str, str] = {}
        for gen in self._published():
            out.setdefault(gen.event, gen.payload_type)
        return out

    def _published(self):
        for tag in self.domain.tags:
            yield from tag.generates
        for s in self.domain.sensors:
            if s.kind is not SensorKind.REQUEST_BASED:
                yield s.generates
        for svc in self.arch.services:
            yield from svc.generates

    def request_targets(self) -> dict:
        """Storages and request-based sensors by name."""
        out = {s.name: s for s in self.domain.storages}
        out.update({s.name: s for s in self.domain.sensors if s.kind is SensorKind.REQUEST_BASED})
        return out

    def placements(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for dev in self.deploy.devices:
            for name in dev.resource_names:
                out.setdefault(name, []).append(dev.name)
        return out


def assignable(target: str, value: Optional[str]) -> bool:
    if value is None:
        return True  # already reported
    return value == target or (target == "double" and value == "long")


class TypeChecker:
    """Static types for expressions over {double, long, String, bool}."""

    def __init__(self, report, env: dict, allow_bare: bool):
        self.report = report
        self.env = env  # root -> {field: type} or None when the root is unavailable
        self.allow_bare = allow_bare

    def infer(self, expr) -> Optional[str]:
        if isinstance(expr, Literal):
            return expr.type
        if isinstance(expr, FieldRef):
            return self._field(expr)
        if isinstance(expr, Unary):
            inner = self.infer(expr.operand)
            if inner is None:
                return None
            if expr.op == "!" and inner == "bool":
                return "bool"
            if expr.op == "-" and inner in NUMERIC:
                return inner
            self.report(expr.span, "V6", f"operator {expr.op!r} not defined for {inner}")
            return None
        if isinstance(expr, Binary):
            left, right = self.infer(expr.left), self.infer(expr.right)
            if left is None or right is None:
                return None
            op = expr.op
            if op in ("+", "-", "*", "/"):
                if left in NUMERIC and right in NUMERIC:
                    return "long" if left == right == "long" else "double"
                if op == "+" and left == right == "String":
                    return "String"
            elif op in ("<", "<=", ">", ">="):
                if (left in NUMERIC and right in NUMERIC) or left == right == "String":
                    return "bool"
            elif op in ("==", "!="):
                if (left in NUMERIC and right in NUMERIC) or left == right:
                    return "bool"
            elif op in ("&&", "||"):
                if left == right == "bool":
                    return "bool"
            self.report(expr.span, "V6", f"operator {op!r} not defined for {left} and {right}")
            return None
        raise TypeError(expr)

    def _field(self, ref: FieldRef) -> Optional[str]:
        root = ref.root
        if root is None:
            if not self.allow_bare:
                self.report(ref.span, "V6",
                            f"bare field {ref.name!r}; qualify it with event., state. or response.")
                return None
            root = ""
        fields = self.env.get(root)
        if fields is None:
            what = root or "payload"
            self.report(ref.span, "V6", f"no {what} is available here")
            return None
        if ref.name not in fields:
            if root == "state":
                self.report(ref.span, "V6", f"state field {ref.name!r} is never set")
            else:
                self.report(ref.span, "V6", f"unknown field {ref.name!r}")
            return None
        return fields[ref.name]

    def expect(self, expr, wanted: str, what: str):
        got = self.infer(expr)
        if got is not None and not assignable(wanted, got):
            self.report(expr.span, "V6", f"{what} must be {wanted}, not {got}")


def _fields(record: Optional[RecordTypeDecl]) -> Optional[dict]:
    if record is None:
        return None
    return {f.name: f.type for f in record.fields}


class _Validator:
    def __init__(self, project: Project):
        self.p = project
        self.diagnostics: list[Diagnostic] = []

    def error(self, span: SourceSpan, code: str, message: str):
        self.diagnostics.append(Diagnostic(Severity.ERROR, code, message, span))

    def warning(self, span: SourceSpan, code: str, message: str):
        self.diagnostics.append(Diagnostic(Severity.WARNING, code, message, span))

    def run(self) -> list[Diagnostic]:
        self.names()
        self.types()
        self.domain_conditions()
        for svc in self.p.arch.services:
            self.service(svc)
        self.deployment()
        self.rules()
        self.unconsumed()
        return sorted(self.diagnostics, key=Diagnostic.sort_key)

    # -- individual checks ----------------------------------------------------

    def names(self):
        owners = {}
        groups = [("resource", self.p.domain.resources()), ("service", self.p.arch.services),
                  ("interactor", self.p.interactors)]
        for kind, items in groups:
            for item in items:
                if item.name in owners and owners[item.name] != kind:
                    self.error(item.span, "NameClash",
                               f"{kind} {item.name!r} reuses the name of a {owners[item.name]}")
                owners.setdefault(item.name, kind)

    def types(self):
        p = self.p
        for svc in p.arch.services:
            for g in svc.generates:
                if p.domain.record(g.payload_type) is None:
                    self.error(g.type_span, "UnknownType", f"undeclared record type {g.payload_type!r}")
        for i in p.interactors:
            if p.record(i.payload.payload_type) is None:
                self.error(i.payload.type_span, "UnknownType",
                           f"undeclared record type {i.payload.payload_type!r}")
        seen: dict[str, str] = {}
        for gen in p._published():
            prior = seen.setdefault(gen.event, gen.payload_type)
            if prior != gen.payload_type:
                self.error(gen.span, "EventTypeConflict",
                           f"event {gen.event!r} already carries {prior}, not {gen.payload_type}")

    def domain_conditions(self):
        for s in self.p.domain.sensors:
            if s.kind is SensorKind.EVENT_DRIVEN:
                env = {"": _fields(self.p.domain.record(s.generates.payload_type))}
                TypeChecker(self.error, env, allow_bare=True).expect(
                    s.condition, "bool", f"condition of {s.name}")

    def service(self, svc: ServiceDecl):
        p = self.p
        for c in svc.consumes:
            if not event_producers(p.domain, p.arch, c.event):
                self.error(c.span, "V1", f"{svc.name} consumes {c.event!r}, which nothing produces")
        targets = p.request_targets()
        for r in svc.requests:
            if r.name not in targets:
                self.error(r.span, "V2",
                           f"request target {r.name!r} is not a storage or request-based sensor")
        for cmd in svc.commands:
            self.arch_command(svc, cmd)
        if svc.kind is ServiceKind.COMMON and svc.compute and svc.consumes and svc.generates:
            self.common(svc)

    def arch_command(self, svc, cmd):
        actuator = self.p.domain.actuator(cmd.actuator)
        if actuator is None:
            self.error(cmd.actuator_span, "V3", f"{cmd.actuator!r} is not a declared actuator")
            return
        action = actuator.action(cmd.action)
        if action is None:
            self.error(cmd.span, "V3", f"{cmd.actuator} has no action {cmd.action!r}")
            return
        if len(cmd.args) != len(action.params):
            self.error(cmd.span, "V3", f"{cmd.actuator}.{cmd.action} takes {len(action.params)} "
                                       f"argument(s), got {len(cmd.args)}")
            return
        for arg, param in zip(cmd.args, action.params):
            if isinstance(arg, FieldRef) and arg.root is None:
                if arg.name != param.name:
                    self.error(arg.span, "V3", f"argument {arg.name!r} does not name parameter "
                                               f"{param.name!r} of {cmd.actuator}.{cmd.action}")
            elif isinstance(arg, Literal):
                if not assignable(param.type, arg.type):
                    self.error(arg.span, "V3", f"{cmd.actuator}.{cmd.action} parameter {param.name} "
                                               f"is {param.type}, got {arg.type}")
            else:
                self.error(arg.span, "V3", "command arguments must be literals or parameter names")

    def common(self, svc: ServiceDecl):
        compute = svc.compute
        in_type = self.p.event_types().get(svc.consumes[0].event)
        in_record = self.p.domain.record(in_type) if in_type else None
        ftype = in_record.field_type(compute.field) if in_record else None
        if in_record is not None and ftype not in NUMERIC:
            self.error(compute.field_span, "V7",
                       f"{svc.consumes[0].event!r} payload has no numeric field {compute.field!r}")
            return
        out_record = self.p.domain.record(svc.generates[0].payload_type)
        if out_record is None or in_record is None:
            return
        result = {"AVG_BY_SAMPLE": "double", "COUNT_BY_SAMPLE": "long"}.get(compute.operator, ftype)
        target = common_result_field(out_record, compute.field)
        if target is None or not assignable(out_record.field_type(target), result):
            self.error(compute.span, "V7", f"{out_record.name} has no field that can hold the "
                                           f"{result} result of {compute.operator}")

    def deployment(self):
        p = self.p
        known = {r.name for r in p.domain.resources()}
        known |= {s.name for s in p.arch.services} | {i.name for i in p.interactors}
        for dev in p.deploy.devices:
            for ref in dev.resources:
                if ref.name not in known:
                    self.error(ref.span, "V4", f"{dev.name} lists unknown resource {ref.name!r}")
                elif isinstance(p.domain.resource(ref.name), StorageDecl) and not dev.database:
                    self.error(dev.span, "V9",
                               f"{dev.name} hosts storage {ref.name!r} but declares no database")
        placements = p.placements()
        for res in p.domain.resources():
            where = placements.get(res.name, [])
            if not where:
                self.error(res.span, "V8", f"{res.name} is not placed on any device")
            elif len(where) > 1:
                dev = p.deploy.device(where[1])
                self.error(dev.span, "V8",
                           f"{res.name} is placed on several devices: {', '.join(where)}")

    def rules(self):
        p = self.p
        for block in p.rules.services:
            svc = p.arch.service(block.service)
            if svc is None:
                self.error(block.span, "V10", f"rules given for undeclared service {block.service!r}")
                continue
            if svc.kind is ServiceKind.COMMON:
                self.error(block.span, "V10", f"Common service {svc.name} is generated; it takes no rules")
                continue
            self.service_rules(svc, block)

    def _response_record(self, svc, name):
        targets = self.p.request_targets()
        for r in svc.requests:
            t = targets.get(r.name)
            if t is not None and t.generates.event == name:
                return self.p.domain.record(t.generates.payload_type)
        return None

    def service_rules(self, svc: ServiceDecl, block):
        p = self.p
        consumed = {c.event for c in svc.consumes}
        event_types = p.event_types()

        def envs(rule, state):
            env = {"state": state, "event": None, "response": None}
            if rule.trigger.kind == "event":
                t = event_types.get(rule.trigger.name)
                env["event"] = _fields(p.record(t)) if t else None
            else:
                env["response"] = _fields(self._response_record(svc, rule.trigger.name))
            return env

        state: dict[str, str] = {}
        silent = lambda *a: None  # noqa: E731
        changed = True
        while changed:
            changed = False
            for rule in block.rules:
                checker = TypeChecker(silent, envs(rule, state), allow_bare=False)
                for act in rule.actions:
                    if isinstance(act, SetState) and act.field not in state:
                        t = checker.infer(act.expr)
                        if t is not None:
                            state[act.field] = t
                            changed = True

        for rule in block.rules:
            trig = rule.trigger
            if trig.kind == "event" and trig.name not in consumed:
                self.error(trig.span, "V10", f"{svc.name} does not consume {trig.name!r}")
                continue
            if trig.kind == "response" and self._response_record(svc, trig.name) is None:
                self.error(trig.span, "V10", f"{svc.name} requests nothing that answers {trig.name!r}")
                continue
            checker = TypeChecker(self.error, envs(rule, state), allow_bare=False)
            if rule.guard is not None:
                checker.expect(rule.guard, "bool", "rule guard")
            for act in rule.actions:
                self.rule_action(svc, act, checker, state)

    def _assigns(self, checker, assigns, record: Optional[RecordTypeDecl], span, what):
        if record is None:
            return
        given = {a.name for a in assigns}
        for a in assigns:
            ftype = record.field_type(a.name)
            if ftype is None:
                self.error(a.span, "V6", f"{what} has no field {a.name!r}")
                continue
            checker.expect(a.expr, ftype, f"{what}.{a.name}")
        missing = [f.name for f in record.fields if f.name not in given]
        if missing:
            self.error(span, "V6", f"{what} leaves {', '.join(missing)} unassigned")

    def rule_action(self, svc, act, checker, state):
        p = self.p
        if isinstance(act, Emit):
            gen = next((g for g in svc.generates if g.event == act.event), None)
            if gen is None:
                self.error(act.span, "V11", f"{svc.name} does not generate {act.event!r}")
                return
            self._assigns(checker, act.assigns, p.domain.record(gen.payload_type), act.span, act.event)
        elif isinstance(act, Command):
            if not any(c.actuator == act.actuator and c.action == act.action for c in svc.commands):
                self.error(act.span, "V3", f"{svc.name} declares no command "
                                           f"{act.action} to {act.actuator}")
                return
            actuator = p.domain.actuator(act.actuator)
            action = actuator.action(act.action) if actuator else None
            if action is None:
                return
            params = {prm.name: prm.type for prm in action.params}
            for a in act.assigns:
                if a.name not in params:
                    self.error(a.span, "V3", f"{act.actuator}.{act.action} has no parameter {a.name!r}")
                else:
                    checker.expect(a.expr, params[a.name], f"{act.actuator}.{act.action}.{a.name}")
            missing = [n for n in params if n not in {a.name for a in act.assigns}]
            if missing:
                self.error(act.span, "V3", f"{act.actuator}.{act.action} missing argument(s) "
                                           f"{', '.join(missing)}")
        elif isinstance(act, Request):
            if act.target not in {r.name for r in svc.requests}:
                self.error(act.span, "V11", f"{svc.name} does not declare 'request {act.target}'")
                return
            target = p.request_targets().get(act.target)
            if target is None:
                return  # V2 already reported
            checker.expect(act.key, target.access_key.type, f"key for {act.target}")
        elif isinstance(act, Notify):
            interactor = p.ui.interactor(act.interactor) if p.ui is not None else None
            if interactor is None:
                self.error(act.span, "V5", f"interactor {act.interactor!r} is not declared in the UI spec")
                return
            self._assigns(checker, act.assigns, p.record(interactor.payload.payload_type),
                          act.span, interactor.payload.event)
        elif isinstance(act, SetState):
            got = checker.infer(act.expr)
            want = state.get(act.field)
            if got is not None and want is not None and not assignable(want, got):
                self.error(act.span, "V6", f"state.{act.field} holds {want}, cannot store {got}")

    def unconsumed(self):
        consumed = {c.event for s in self.p.arch.services for c in s.consumes}
        for gen in self.p._published():
            if gen.event not in consumed:
                self.warning(gen.span, "W1", f"event {gen.event!r} is generated but never consumed")


def common_result_field(record: RecordTypeDecl, preferred: str) -> Optional[str]:
    """Field of a Common service's output record that receives the aggregate."""
    if record.field_type(preferred) in NUMERIC:
        return preferred
    for f in record.fields:
        if f.type in NUMERIC:
            return f.name
    return None


def validate_project(project: Project) -> list[Diagnostic]:
    """Every cross-spec diagnostic, sorted by position. Never raises."""
    return _Validator(project).run()


def dataflow_graph(project: Project) -> nx.MultiDiGraph:
    """Nodes are resources, services and interactors; edges are keyed by flow label."""
    if has_errors(validate_project(project)):
        raise InvalidProject("project has validation errors")
    p = project
    g = nx.MultiDiGraph()
    for res in p.domain.resources():
        g.add_node(res.name, kind=type(res).__name__.removesuffix("Decl").lower())
    for svc in p.arch.services:
        g.add_node(svc.name, kind="service")
    for i in p.interactors:
        g.add_node(i.name, kind="interactor")
    for svc in p.arch.services:
        for c in svc.consumes:
            for producer in event_producers(p.domain, p.arch, c.event):
                g.add_edge(producer, svc.name, key=c.event, kind="event")
        targets = p.request_targets()
        for r in svc.requests:
            g.add_edge(svc.name, r.name, key=f"request:{r.name}", kind="request")
            g.add_edge(r.name, svc.name, key=targets[r.name].generates.event, kind="response")
        for cmd in svc.commands:
            g.add_edge(svc.name, cmd.actuator, key=f"{cmd.actuator}.{cmd.action}", kind="command")
    for block in p.rules.services:
        for rule in block.rules:
            for act in rule.actions:
                if isinstance(act, Notify) and not g.has_edge(block.service, act.interactor):
                    event = p.ui.interactor(act.interactor).payload.event
                    g.add_edge(block.service, act.interactor, key=event, kind="notify")
    return g
