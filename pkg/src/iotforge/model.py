"""Language-neutral abstract syntax shared by all pipeline stages.

Every value is a frozen dataclass built from tuples, so specs can be shared
freely once parsed. Source spans never take part in equality: two specs are
structurally equal when they declare the same things in the same order,
wherever the text came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .errors import UnknownAction, UnknownActuator

PRIMITIVE_TYPES = ("double", "long", "String")


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid span {self!r}")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


NO_SPAN = SourceSpan("<generated>", 1, 1, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: Union[bool, int, float, str]
    type: str  # "long" | "double" | "String" | "bool"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class FieldRef:
    """``root.name``; a bare ``name`` (root None) reads the current payload."""

    root: Optional[str]  # "event" | "state" | "response" | None
    name: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # "!" | "-"
    operand: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan = _span()


Expr = Union[Literal, FieldRef, Unary, Binary]

BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
UNARY_PRECEDENCE = 6


def walk_expr(expr: Expr):
    """Yield every node of ``expr`` in pre-order."""
    yield expr
    if isinstance(expr, Unary):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)


# -- domain ------------------------------------------------------------------

@dataclass(frozen=True)
class FieldDecl:
    name: str
    type: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class RecordTypeDecl:
    name: str
    fields: tuple[FieldDecl, ...] = ()
    span: SourceSpan = _span()

    def field_type(self, name: str) -> Optional[str]:
        for f in self.fields:
            if f.name == name:
                return f.type
        return None


@dataclass(frozen=True)
class GenerateDecl:
    """An ``event: RecordType`` pair; ``span`` covers the event, ``type_span`` the type."""

    event: str
    payload_type: str
    span: SourceSpan = _span()
    type_span: SourceSpan = _span()


@dataclass(frozen=True)
class KeyDecl:
    name: str
    type: str
    span: SourceSpan = _span()


class SensorKind(str, Enum):
    PERIODIC = "Periodic"
    EVENT_DRIVEN = "EventDriven"
    REQUEST_BASED = "RequestBased"


@dataclass(frozen=True)
class SensorDecl:
    name: str
    kind: SensorKind
    generates: GenerateDecl
    sample_period: Optional[float] = None  # seconds
    duration: Optional[float] = None  # seconds
    condition: Optional[Expr] = None
    access_key: Optional[KeyDecl] = None
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ActionDecl:
    name: str
    params: tuple[FieldDecl, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ActuatorDecl:
    name: str
    actions: tuple[ActionDecl, ...] = ()
    span: SourceSpan = _span()

    def action(self, name: str) -> Optional[ActionDecl]:
        for a in self.actions:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class StorageDecl:
    name: str
    generates: GenerateDecl
    access_key: KeyDecl
    span: SourceSpan = _span()


@dataclass(frozen=True)
class TagDecl:
    name: str
    generates: tuple[GenerateDecl, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class DomainSpec:
    records: tuple[RecordTypeDecl, ...] = ()
    tags: tuple[TagDecl, ...] = ()
    sensors: tuple[SensorDecl, ...] = ()
    actuators: tuple[ActuatorDecl, ...] = ()
    storages: tuple[StorageDecl, ...] = ()

    def record(self, name: str) -> Optional[RecordTypeDecl]:
        for r in self.records:
            if r.name == name:
                return r
        return None

    def resources(self):
        """All driver resources in declaration order (tags, sensors, actuators, storages)."""
        return (*self.tags, *self.sensors, *self.actuators, *self.storages)

    def resource(self, name: str):
        for r in self.resources():
            if r.name == name:
                return r
        return None

    def actuator(self, name: str) -> Optional[ActuatorDecl]:
        for a in self.actuators:
            if a.name == name:
                return a
        return None


# -- architecture -------------------------------------------------------------

class Scope(str, Enum):
    SAME_LOCATION = "SameLocation"
    GLOBAL = "Global"


class ServiceKind(str, Enum):
    COMMON = "Common"
    CUSTOM = "Custom"


COMMON_OPERATORS = ("AVG_BY_SAMPLE", "SUM_BY_SAMPLE", "COUNT_BY_SAMPLE")


@dataclass(frozen=True)
class ConsumeDecl:
    event: str
    scope: Scope = Scope.SAME_LOCATION
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ComputeDecl:
    operator: str
    window: int
    field: str
    span: SourceSpan = _span()
    field_span: SourceSpan = _span()


@dataclass(frozen=True)
class NameRef:
    name: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class CommandDecl:
    """``command Action(args) to Actuator``; identifier args name the bound parameter."""

    action: str
    actuator: str
    args: tuple[Expr, ...] = ()
    span: SourceSpan = _span()
    actuator_span: SourceSpan = _span()


@dataclass(frozen=True)
class ServiceDecl:
    name: str
    kind: ServiceKind
    consumes: tuple[ConsumeDecl, ...] = ()
    compute: Optional[ComputeDecl] = None
    requests: tuple[NameRef, ...] = ()
    generates: tuple[GenerateDecl, ...] = ()
    commands: tuple[CommandDecl, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ArchitectureSpec:
    services: tuple[ServiceDecl, ...] = ()

    def service(self, name: str) -> Optional[ServiceDecl]:
        for s in self.services:
            if s.name == name:
                return s
        return None


# -- user interaction ---------------------------------------------------------

@dataclass(frozen=True)
class InteractorDecl:
    name: str
    payload: GenerateDecl
    kind: str = "Notify"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class UserInteractionSpec:
    records: tuple[RecordTypeDecl, ...] = ()
    interactors: tuple[InteractorDecl, ...] = ()

    def interactor(self, name: str) -> Optional[InteractorDecl]:
        for i in self.interactors:
            if i.name == name:
                return i
        return None


# -- deployment ---------------------------------------------------------------

@dataclass(frozen=True)
class DeviceDecl:
    name: str
    location: str
    resources: tuple[NameRef, ...] = ()
    platform: Optional[str] = None
    protocol: Optional[str] = None
    database: Optional[str] = None
    span: SourceSpan = _span()

    @property
    def resource_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.resources)


@dataclass(frozen=True)
class DeploymentSpec:
    devices: tuple[DeviceDecl, ...] = ()

    def device(self, name: str) -> Optional[DeviceDecl]:
        for d in self.devices:
            if d.name == name:
                return d
        return None


# -- logic rules --------------------------------------------------------------

@dataclass(frozen=True)
class Trigger:
    kind: str  # "event" | "response"
    name: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Emit:
    event: str
    assigns: tuple[Assign, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Command:
    actuator: str
    action: str
    assigns: tuple[Assign, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Request:
    target: str
    key: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Notify:
    interactor: str
    assigns: tuple[Assign, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class SetState:
    field: str
    expr: Expr
    span: SourceSpan = _span()


Action = Union[Emit, Command, Request, Notify, SetState]


@dataclass(frozen=True)
class Rule:
    trigger: Trigger
    guard: Optional[Expr] = None
    actions: tuple[Action, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ServiceRules:
    service: str
    rules: tuple[Rule, ...] = ()
    span: SourceSpan = _span()
    source: str = field(default="", compare=False, repr=False)


@dataclass(frozen=True)
class LogicRuleSet:
    services: tuple[ServiceRules, ...] = ()

    def for_service(self, name: str) -> Optional[ServiceRules]:
        for s in self.services:
            if s.service == name:
                return s
        return None


# -- diagnostics --------------------------------------------------------------

class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def render(self) -> str:
        return f"{self.span}: {self.severity.value}[{self.code}]: {self.message}"

    def sort_key(self):
        return (self.span.file, self.span.line, self.span.column, self.code, self.message)


def has_errors(diagnostics) -> bool:
    return any(d.is_error for d in diagnostics)


# -- queries ------------------------------------------------------------------

def event_producers(domain: DomainSpec, arch: ArchitectureSpec, event: str) -> list[str]:
    """Names of every tag, sensor or service that generates ``event``."""
    found = []
    for tag in domain.tags:
        if any(g.event == event for g in tag.generates):
            found.append(tag.name)
    for sensor in domain.sensors:
        if sensor.generates.event == event:
            found.append(sensor.name)
    for service in arch.services:
        if any(g.event == event for g in service.generates):
            found.append(service.name)
    return found


def action_signature(domain: DomainSpec, actuator: str, action: str) -> list[tuple[str, str]]:
    act = domain.actuator(actuator)
    if act is None:
        raise UnknownActuator(actuator)
    decl = act.action(action)
    if decl is None:
        raise UnknownAction(f"{actuator}.{action}")
    return [(p.name, p.type) for p in decl.params]
