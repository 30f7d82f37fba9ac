"""Canonical source text for every spec type.

Output uses two-space indentation and LF line endings, and keeps declaration
order, so ``parse(format_spec(s)) == s`` and formatting is idempotent.
"""

from __future__ import annotations

from functools import singledispatch
from itertools import groupby

from .model import (
    BINARY_PRECEDENCE,
    UNARY_PRECEDENCE,
    ArchitectureSpec,
    Binary,
    Command,
    DeploymentSpec,
    DomainSpec,
    Emit,
    FieldRef,
    Literal,
    LogicRuleSet,
    Notify,
    RecordTypeDecl,
    Request,
    Scope,
    SensorKind,
    ServiceRules,
    SetState,
    Unary,
    UserInteractionSpec,
)
from .parsing.lexer import quote

_GROUP_KEYWORD = {
    SensorKind.PERIODIC: "periodicSensors",
    SensorKind.EVENT_DRIVEN: "eventDrivenSensors",
    SensorKind.REQUEST_BASED: "requestBasedSensors",
}


def format_number(value) -> str:
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 1e16:
            return str(int(value))
        return repr(value)
    return str(value)


def format_literal(lit: Literal) -> str:
    if lit.type == "String":
        return quote(lit.value)
    if lit.type == "bool":
        return "true" if lit.value else "false"
    if lit.type == "double":
        return repr(float(lit.value))
    return str(lit.value)


def format_expr(expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Literal):
        text = format_literal(expr)
        if text.startswith("-") and parent_prec >= UNARY_PRECEDENCE:
            return f"({text})"
        return text
    if isinstance(expr, FieldRef):
        return expr.name if expr.root is None else f"{expr.root}.{expr.name}"
    if isinstance(expr, Unary):
        inner = format_expr(expr.operand, UNARY_PRECEDENCE)
        if expr.op == "-" and inner.startswith("-"):
            inner = f"({inner})"
        return f"{expr.op}{inner}"
    if isinstance(expr, Binary):
        prec = BINARY_PRECEDENCE[expr.op]
        text = f"{format_expr(expr.left, prec)} {expr.op} {format_expr(expr.right, prec, True)}"
        if prec < parent_prec or (right_side and prec == parent_prec):
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {expr!r}")


def _records(records, indent: str) -> list[str]:
    lines = [f"{indent}structs {{"]
    for r in records:
        lines.extend(_record(r, indent + "  "))
    lines.append(f"{indent}}}")
    return lines


def _record(r: RecordTypeDecl, indent: str) -> list[str]:
    lines = [f"{indent}{r.name} {{"]
    lines.extend(f"{indent}  {f.name}: {f.type};" for f in r.fields)
    lines.append(f"{indent}}}")
    return lines


def _text(lines) -> str:
    return "\n".join(lines) + "\n"


@singledispatch
def format_spec(spec) -> str:
    """Emit deterministic, normalized DSL text for any spec value."""
    raise TypeError(f"cannot format {type(spec).__name__}")


@format_spec.register
def _(spec: DomainSpec) -> str:
    if not (spec.records or spec.tags or spec.sensors or spec.actuators or spec.storages):
        return "resources { }\n"
    lines = ["resources {"]
    if spec.records:
        lines.extend(_records(spec.records, "  "))
    if spec.tags:
        lines.append("  tags {")
        for t in spec.tags:
            lines.append(f"    {t.name} {{")
            lines.extend(f"      generate {g.event}: {g.payload_type};" for g in t.generates)
            lines.append("    }")
        lines.append("  }")
    if spec.sensors:
        lines.append("  sensors {")
        for kind, run in groupby(spec.sensors, key=lambda s: s.kind):
            lines.append(f"    {_GROUP_KEYWORD[kind]} {{")
            for s in run:
                lines.append(f"      {s.name} {{")
                gen = f"generate {s.generates.event}: {s.generates.payload_type}"
                if kind is SensorKind.REQUEST_BASED:
                    gen += f" accessed-by {s.access_key.name}: {s.access_key.type}"
                lines.append(f"        {gen};")
                if kind is SensorKind.PERIODIC:
                    lines.append(f"        sample period {format_number(s.sample_period)} "
                                 f"for {format_number(s.duration)};")
                elif kind is SensorKind.EVENT_DRIVEN:
                    lines.append(f"        onCondition {format_expr(s.condition)};")
                lines.append("      }")
            lines.append("    }")
        lines.append("  }")
    if spec.actuators:
        lines.append("  actuators {")
        for a in spec.actuators:
            lines.append(f"    {a.name} {{")
            for act in a.actions:
                params = ", ".join(f"{p.name}: {p.type}" for p in act.params)
                lines.append(f"      action {act.name}({params});")
            lines.append("    }")
        lines.append("  }")
    if spec.storages:
        lines.append("  storages {")
        for s in spec.storages:
            lines.append(f"    {s.name} {{")
            lines.append(f"      generate {s.generates.event}: {s.generates.payload_type} "
                         f"accessed-by {s.access_key.name}: {s.access_key.type};")
            lines.append("    }")
        lines.append("  }")
    lines.append("}")
    return _text(lines)


@format_spec.register
def _(spec: ArchitectureSpec) -> str:
    if not spec.services:
        return "computationalServices { }\n"
    lines = ["computationalServices {"]
    for s in spec.services:
        lines.append(f"  {s.kind.value} {s.name} {{")
        for c in s.consumes:
            suffix = " from global" if c.scope is Scope.GLOBAL else ""
            lines.append(f"    consume {c.event}{suffix};")
        if s.compute:
            lines.append(f"    COMPUTE {s.compute.operator}({s.compute.window}) on {s.compute.field};")
        lines.extend(f"    request {r.name};" for r in s.requests)
        lines.extend(f"    generate {g.event}: {g.payload_type};" for g in s.generates)
        for c in s.commands:
            args = ", ".join(format_expr(a) for a in c.args)
            lines.append(f"    command {c.action}({args}) to {c.actuator};")
        lines.append("  }")
    lines.append("}")
    return _text(lines)


@format_spec.register
def _(spec: UserInteractionSpec) -> str:
    if not (spec.records or spec.interactors):
        return "userInteractions { }\n"
    lines = ["userInteractions {"]
    if spec.records:
        lines.extend(_records(spec.records, "  "))
    if spec.interactors:
        lines.append("  resources {")
        for i in spec.interactors:
            lines.append(f"    {i.name} {{")
            lines.append(f"      notify {i.payload.event}: {i.payload.payload_type};")
            lines.append("    }")
        lines.append("  }")
    lines.append("}")
    return _text(lines)


@format_spec.register
def _(spec: DeploymentSpec) -> str:
    if not spec.devices:
        return "devices { }\n"
    lines = ["devices {"]
    for d in spec.devices:
        lines.append(f"  {d.name} {{")
        lines.append(f"    location: {quote(d.location)};")
        if d.resources:
            lines.append(f"    resources: {', '.join(d.resource_names)};")
        if d.platform:
            lines.append(f"    language-platform: {d.platform};")
        lines.append(f"    protocol: {d.protocol};")
        if d.database:
            lines.append(f"    database: {d.database};")
        lines.append("  }")
    lines.append("}")
    return _text(lines)


def _assigns(assigns) -> str:
    return ", ".join(f"{a.name} = {format_expr(a.expr)}" for a in assigns)


def format_action(action) -> str:
    if isinstance(action, Emit):
        return f"emit {action.event}({_assigns(action.assigns)})"
    if isinstance(action, Command):
        return f"command {action.actuator}.{action.action}({_assigns(action.assigns)})"
    if isinstance(action, Request):
        return f"request {action.target}({format_expr(action.key)})"
    if isinstance(action, Notify):
        return f"notify {action.interactor}({_assigns(action.assigns)})"
    if isinstance(action, SetState):
        return f"set {action.field} = {format_expr(action.expr)}"
    raise TypeError(f"not an action: {action!r}")


def format_service_rules(block: ServiceRules) -> str:
    lines = [f"service {block.service} {{"]
    for r in block.rules:
        head = "on response " if r.trigger.kind == "response" else "on "
        head += r.trigger.name
        if r.guard is not None:
            head += f" when {format_expr(r.guard)}"
        lines.append(f"  {head} -> {', '.join(format_action(a) for a in r.actions)};")
    lines.append("}")
    return _text(lines)


@format_spec.register
def _(spec: LogicRuleSet) -> str:
    return "\n".join(format_service_rules(b) for b in spec.services)
