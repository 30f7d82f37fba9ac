"""Per-concern framework generation through a plug-in."""

from __future__ import annotations

import logging
import posixpath
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..formatting import format_expr, format_number
from ..model import (
    ArchitectureSpec,
    DomainSpec,
    LogicRuleSet,
    Notify,
    SensorKind,
    ServiceDecl,
    UserInteractionSpec,
)
from .descriptors import (
    DriverDescriptor,
    ServiceDescriptor,
    SinkDescriptor,
    dump_json,
    records_dict,
)
from .plugins import REGISTRY, Plugin, TargetKind
from .templates import render_template

log = logging.getLogger(__name__)


class SourceStage(str, Enum):
    DOMAIN = "DomainFramework"
    ARCHITECTURE = "ArchitectureFramework"
    UI = "UIFramework"


@dataclass(frozen=True)
class GeneratedArtifact:
    relative_path: str
    content: bytes
    source_stage: SourceStage

    def __post_init__(self):
        norm = posixpath.normpath(self.relative_path)
        if norm != self.relative_path or norm.startswith(("/", "..")) or "/../" in norm:
            raise ValueError(f"artifact path must be normalized and relative: {self.relative_path!r}")


_DRIVER_KIND = {
    SensorKind.PERIODIC: "periodic",
    SensorKind.EVENT_DRIVEN: "eventDriven",
    SensorKind.REQUEST_BASED: "requestBased",
}


def handler_name(event: str, response: bool = False) -> str:
    return f"onNew{event}Received" if response else f"onNew{event}"


def _schema(lookup, type_names) -> list:
    seen = []
    for name in type_names:
        rec = lookup(name)
        if rec is not None and rec not in seen:
            seen.append(rec)
    return seen


def _driver_descriptors(domain: DomainSpec) -> list[DriverDescriptor]:
    out = []
    for t in domain.tags:
        gens = tuple((g.event, g.payload_type) for g in t.generates)
        out.append((t.name, "tag", gens, {}))
    for s in domain.sensors:
        extra = {}
        if s.kind is SensorKind.PERIODIC:
            extra = {"sample_period_s": s.sample_period, "duration_s": s.duration}
        elif s.kind is SensorKind.EVENT_DRIVEN:
            extra = {"condition": format_expr(s.condition)}
        else:
            extra = {"access_key": (s.access_key.name, s.access_key.type)}
        out.append((s.name, _DRIVER_KIND[s.kind], ((s.generates.event, s.generates.payload_type),), extra))
    for a in domain.actuators:
        actions = tuple((act.name, tuple((p.name, p.type) for p in act.params)) for act in a.actions)
        out.append((a.name, "actuator", (), {"actions": actions}))
    for s in domain.storages:
        out.append((s.name, "storage", ((s.generates.event, s.generates.payload_type),),
                    {"access_key": (s.access_key.name, s.access_key.type)}))
    descriptors = []
    for name, kind, gens, extra in out:
        records = _schema(domain.record, [t for _, t in gens])
        descriptors.append(DriverDescriptor(name=name, kind=kind, generates=gens,
                                            records=records_dict(records), **extra))
    return descriptors


def _driver_notes(d: DriverDescriptor) -> list[str]:
    notes = []
    if d.sample_period_s is not None:
        notes.append(f"samples every {format_number(d.sample_period_s)} s "
                     f"for {format_number(d.duration_s)} s")
    if d.condition is not None:
        notes.append(f"fires when {d.condition}")
    if d.access_key is not None:
        notes.append(f"accessed by {d.access_key[0]}: {d.access_key[1]}")
    return notes


def _emit(plugin: Plugin, folder: str, name: str, template: str, bindings: dict,
          descriptor, stage: SourceStage) -> GeneratedArtifact:
    path = f"{folder}/{name}{plugin.extension}"
    if plugin.target_kind is TargetKind.SIM_DESCRIPTOR:
        content = dump_json(descriptor.to_dict())
    else:
        text = render_template(plugin.templates[template], {"plugin": plugin.id, **bindings})
        content = text.encode("utf-8")
    return GeneratedArtifact(path, content, stage)


def generate_domain_framework(domain: DomainSpec, plugin) -> list[GeneratedArtifact]:
    """One driver stub or descriptor per tag, sensor, actuator and storage."""
    plugin = REGISTRY.get(plugin)
    artifacts = []
    for d in _driver_descriptors(domain):
        bindings = {
            "name": d.name,
            "kind": d.kind,
            "events": [{"event": e, "type": t} for e, t in d.generates],
            "actions": [{"name": n, "params": ", ".join(f"{p}: {t}" for p, t in ps)}
                        for n, ps in d.actions],
            "notes": _driver_notes(d),
        }
        artifacts.append(_emit(plugin, "drivers", d.name, "driver", bindings, d, SourceStage.DOMAIN))
    return artifacts


def _event_types(domain: DomainSpec, arch: ArchitectureSpec) -> dict[str, str]:
    out: dict[str, str] = {}
    for t in domain.tags:
        for g in t.generates:
            out.setdefault(g.event, g.payload_type)
    for s in domain.sensors:
        out.setdefault(s.generates.event, s.generates.payload_type)
    for s in domain.storages:
        out.setdefault(s.generates.event, s.generates.payload_type)
    for svc in arch.services:
        for g in svc.generates:
            out.setdefault(g.event, g.payload_type)
    return out


def service_descriptor(svc: ServiceDecl, domain: DomainSpec, arch: ArchitectureSpec,
                       rules: Optional[LogicRuleSet] = None,
                       ui: Optional[UserInteractionSpec] = None) -> ServiceDescriptor:
    types = _event_types(domain, arch)
    type_names = [types.get(c.event) for c in svc.consumes]
    type_names += [g.payload_type for g in svc.generates]
    for r in svc.requests:
        target = domain.resource(r.name)
        if target is not None:
            type_names.append(target.generates.payload_type)
    rule_ref = None
    if rules is not None and rules.for_service(svc.name) is not None:
        rule_ref = f"rules/{svc.name}.rules"
        if ui is not None:
            for rule in rules.for_service(svc.name).rules:
                for act in rule.actions:
                    if isinstance(act, Notify) and ui.interactor(act.interactor):
                        type_names.append(ui.interactor(act.interactor).payload.payload_type)

    def lookup(name):
        if name is None:
            return None
        if ui is not None:
            for r in ui.records:
                if r.name == name:
                    return r
        return domain.record(name)

    return ServiceDescriptor.from_decl(svc, _schema(lookup, type_names), rule_ref)


def generate_architecture_framework(arch: ArchitectureSpec, domain: DomainSpec, plugin, *,
                                    rules: Optional[LogicRuleSet] = None,
                                    ui: Optional[UserInteractionSpec] = None
                                    ) -> list[GeneratedArtifact]:
    """One scaffold or descriptor per computational service.

    Scaffolds declare an abstract ``onNew<Event>`` handler per consumed event
    and ``onNew<Event>Received`` per request response.
    """
    plugin = REGISTRY.get(plugin)
    types = _event_types(domain, arch)
    artifacts = []
    for svc in arch.services:
        if not svc.consumes:
            log.warning("service %s consumes no events; its scaffold has no handlers", svc.name)
        desc = service_descriptor(svc, domain, arch, rules, ui)
        handlers = [{"handler": handler_name(c.event), "arg": "event", "type": types.get(c.event, "?")}
                    for c in svc.consumes]
        requests = []
        for r in svc.requests:
            target = domain.resource(r.name)
            handlers.append({"handler": handler_name(target.generates.event, response=True),
                             "arg": "response", "type": target.generates.payload_type})
            requests.append({"target": r.name,
                             "key": f"{target.access_key.name}: {target.access_key.type}"})
        notes = []
        if svc.compute is not None:
            c = svc.compute
            notes.append(f"COMPUTE {c.operator}({c.window}) on {c.field}; logic fully generated")
        if desc.rule_ref:
            notes.append(f"logic rules: {desc.rule_ref}")
        bindings = {
            "name": svc.name,
            "kind": svc.kind.value,
            "handlers": handlers,
            "publications": [{"event": g.event, "type": g.payload_type} for g in svc.generates],
            "requests": requests,
            "commands": [{"actuator": c.actuator, "action": c.action,
                          "params": ", ".join(format_expr(a) for a in c.args)}
                         for c in svc.commands],
            "notes": notes,
        }
        artifacts.append(_emit(plugin, "services", svc.name, "service", bindings, desc,
                               SourceStage.ARCHITECTURE))
    return artifacts


def generate_ui_framework(ui: Optional[UserInteractionSpec], plugin) -> list[GeneratedArtifact]:
    """One notification sink per interactor; an absent UI spec yields nothing."""
    plugin = REGISTRY.get(plugin)
    if ui is None:
        return []
    artifacts = []
    for i in ui.interactors:
        rec = next((r for r in ui.records if r.name == i.payload.payload_type), None)
        desc = SinkDescriptor(i.name, i.payload.event, i.payload.payload_type,
                              records=records_dict([rec] if rec else []))
        bindings = {
            "name": i.name,
            "event": i.payload.event,
            "type": i.payload.payload_type,
            "fields": [{"name": f.name, "type": f.type} for f in rec.fields] if rec else [],
        }
        artifacts.append(_emit(plugin, "sinks", i.name, "sink", bindings, desc, SourceStage.UI))
    return artifacts


def generate_all(project, plugin) -> list[GeneratedArtifact]:
    """Domain, architecture and UI artifacts for a validated project."""
    return (generate_domain_framework(project.domain, plugin)
            + generate_architecture_framework(project.arch, project.domain, plugin,
                                              rules=project.rules, ui=project.ui)
            + generate_ui_framework(project.ui, plugin))

