"""Machine-readable descriptors consumed by the linker and the simulator.

Serialized as JSON with sorted keys, two-space indent, UTF-8 and a trailing
LF so output is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from ..formatting import format_expr
from ..model import (
    CommandDecl,
    ComputeDecl,
    ConsumeDecl,
    FieldDecl,
    GenerateDecl,
    NameRef,
    RecordTypeDecl,
    Scope,
    ServiceDecl,
    ServiceKind,
)
from ..parsing import parse_expr


def dump_json(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def records_dict(records) -> dict:
    return {r.name: [[f.name, f.type] for f in r.fields] for r in records}


@dataclass(frozen=True)
class ServiceDescriptor:
    service: str
    kind: str
    subscriptions: tuple[tuple[str, str], ...] = ()  # (event, scope)
    publications: tuple[tuple[str, str], ...] = ()  # (event, record type)
    requests: tuple[str, ...] = ()
    commands: tuple[tuple[str, str, tuple[str, ...]], ...] = ()  # (action, actuator, arg texts)
    compute: Optional[tuple[str, int, str]] = None  # (operator, window, field)
    rule_ref: Optional[str] = None
    records: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_decl(cls, decl: ServiceDecl, records=(), rule_ref=None) -> "ServiceDescriptor":
        c = decl.compute
        return cls(
            service=decl.name,
            kind=decl.kind.value,
            subscriptions=tuple((x.event, x.scope.value) for x in decl.consumes),
            publications=tuple((g.event, g.payload_type) for g in decl.generates),
            requests=tuple(r.name for r in decl.requests),
            commands=tuple((x.action, x.actuator, tuple(format_expr(a) for a in x.args))
                           for x in decl.commands),
            compute=(c.operator, c.window, c.field) if c else None,
            rule_ref=rule_ref,
            records=records_dict(records),
        )

    def to_decl(self) -> ServiceDecl:
        """Rebuild the architecture declaration this descriptor was made from."""
        def expr(text):
            e, diags = parse_expr(text)
            if e is None:
                raise ValueError(f"bad argument expression {text!r}: {diags}")
            return e

        return ServiceDecl(
            name=self.service,
            kind=ServiceKind(self.kind),
            consumes=tuple(ConsumeDecl(e, Scope(s)) for e, s in self.subscriptions),
            compute=ComputeDecl(*self.compute) if self.compute else None,
            requests=tuple(NameRef(r) for r in self.requests),
            generates=tuple(GenerateDecl(e, t) for e, t in self.publications),
            commands=tuple(CommandDecl(a, act, tuple(expr(x) for x in args))
                           for a, act, args in self.commands),
        )

    def to_dict(self) -> dict:
        return {
            "service": self.service,
            "kind": self.kind,
            "subscriptions": [{"event": e, "scope": s} for e, s in self.subscriptions],
            "publications": [{"event": e, "type": t} for e, t in self.publications],
            "requests": list(self.requests),
            "commands": [{"action": a, "actuator": t, "args": list(args)}
                         for a, t, args in self.commands],
            "compute": None if self.compute is None else dict(
                zip(("operator", "window", "field"), self.compute)),
            "rule_ref": self.rule_ref,
            "records": self.records,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ServiceDescriptor":
        c = d.get("compute")
        return cls(
            service=d["service"],
            kind=d["kind"],
            subscriptions=tuple((x["event"], x["scope"]) for x in d["subscriptions"]),
            publications=tuple((x["event"], x["type"]) for x in d["publications"]),
            requests=tuple(d["requests"]),
            commands=tuple((x["action"], x["actuator"], tuple(x["args"])) for x in d["commands"]),
            compute=(c["operator"], c["window"], c["field"]) if c else None,
            rule_ref=d.get("rule_ref"),
            records=d.get("records", {}),
        )


@dataclass(frozen=True)
class DriverDescriptor:
    """One tag, sensor, actuator or storage as the simulator needs it."""

    name: str
    kind: str  # tag | periodic | eventDriven | requestBased | actuator | storage
    generates: tuple[tuple[str, str], ...] = ()
    sample_period_s: Optional[float] = None
    duration_s: Optional[float] = None
    condition: Optional[str] = None
    access_key: Optional[tuple[str, str]] = None
    actions: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = ()
    records: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "generates": [{"event": e, "type": t} for e, t in self.generates],
            "sample_period_s": self.sample_period_s,
            "duration_s": self.duration_s,
            "condition": self.condition,
            "access_key": None if self.access_key is None else
            {"name": self.access_key[0], "type": self.access_key[1]},
            "actions": [{"name": n, "params": [[p, t] for p, t in params]}
                        for n, params in self.actions],
            "records": self.records,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DriverDescriptor":
        key = d.get("access_key")
        return cls(
            name=d["name"],
            kind=d["kind"],
            generates=tuple((x["event"], x["type"]) for x in d["generates"]),
            sample_period_s=d.get("sample_period_s"),
            duration_s=d.get("duration_s"),
            condition=d.get("condition"),
            access_key=(key["name"], key["type"]) if key else None,
            actions=tuple((a["name"], tuple((p, t) for p, t in a["params"])) for a in d["actions"]),
            records=d.get("records", {}),
        )


@dataclass(frozen=True)
class SinkDescriptor:
    interactor: str
    event: str
    type: str
    kind: str = "notify"
    records: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"interactor": self.interactor, "kind": self.kind, "event": self.event,
                "type": self.type, "records": self.records}

    @classmethod
    def from_dict(cls, d: dict) -> "SinkDescriptor":
        return cls(d["interactor"], d["event"], d["type"], d.get("kind", "notify"),
                   d.get("records", {}))


def record_from_json(name: str, fields) -> RecordTypeDecl:
    return RecordTypeDecl(name, tuple(FieldDecl(n, t) for n, t in fields))
