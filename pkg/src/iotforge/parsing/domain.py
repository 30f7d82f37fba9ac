"""Parser for the domain vocabulary language (``*.vocab.mydsl``)."""

from __future__ import annotations

from ..model import (
    ActionDecl,
    ActuatorDecl,
    DomainSpec,
    FieldDecl,
    GenerateDecl,
    KeyDecl,
    RecordTypeDecl,
    SensorDecl,
    SensorKind,
    StorageDecl,
    TagDecl,
)
from .base import Parser, _Bail

SENSOR_GROUPS = {
    "periodicSensors": SensorKind.PERIODIC,
    "eventDrivenSensors": SensorKind.EVENT_DRIVEN,
    "requestBasedSensors": SensorKind.REQUEST_BASED,
}


class RecordParserMixin:
    """``structs { Name { field: type; ... } ... }`` blocks, shared with the UI language."""

    def records_block(self, into: list):
        self.block(lambda: into.append(self.record()))

    def record(self) -> RecordTypeDecl:
        name = self.ident("record type name")
        fields: list[FieldDecl] = []

        def field_decl():
            fname = self.ident("field name")
            self.expect(":")
            ftype = self.type_name()
            self.expect(";")
            if any(f.name == fname.text for f in fields):
                self.report(fname.span, "DuplicateField",
                            f"field {fname.text!r} declared twice in record {name.text!r}")
            fields.append(FieldDecl(fname.text, ftype.text, fname.span))

        self.block(field_decl)
        return RecordTypeDecl(name.text, tuple(fields), name.span)

    def generate_clause(self) -> GenerateDecl:
        """``IDENT ':' IDENT`` after a ``generate``/``notify`` keyword."""
        event = self.ident("event name")
        self.expect(":")
        type_tok = self.ident("record type name")
        return GenerateDecl(event.text, type_tok.text, event.span, type_tok.span)

    def check_unique_records(self, records):
        seen = set()
        for r in records:
            if r.name in seen:
                self.report(r.span, "DuplicateRecord", f"record type {r.name!r} declared twice")
            seen.add(r.name)


class DomainParser(RecordParserMixin, Parser):
    def parse(self) -> DomainSpec:
        self.records: list[RecordTypeDecl] = []
        self.tags: list[TagDecl] = []
        self.sensors: list[SensorDecl] = []
        self.actuators: list[ActuatorDecl] = []
        self.storages: list[StorageDecl] = []
        try:
            self.expect("resources")
            self.block(self.section)
            self.finish()
        except _Bail:
            pass
        spec = DomainSpec(tuple(self.records), tuple(self.tags), tuple(self.sensors),
                          tuple(self.actuators), tuple(self.storages))
        self.check(spec)
        return spec

    def section(self):
        tok = self.peek()
        if self.accept("structs"):
            self.records_block(self.records)
        elif self.accept("tags"):
            self.block(lambda: self.tags.append(self.tag()))
        elif self.accept("sensors"):
            self.block(self.sensor_group)
        elif self.accept("actuators"):
            self.block(lambda: self.actuators.append(self.actuator()))
        elif self.accept("storages"):
            self.block(lambda: self.storages.append(self.storage()))
        else:
            self.error("expected structs, tags, sensors, actuators or storages", tok=tok)

    def tag(self) -> TagDecl:
        name = self.ident("tag name")
        gens: list[GenerateDecl] = []

        def stmt():
            self.expect("generate")
            gens.append(self.generate_clause())
            self.expect(";")

        self.block(stmt)
        if not gens:
            self.report(name.span, "MissingGenerate", f"tag {name.text!r} generates no event")
        return TagDecl(name.text, tuple(gens), name.span)

    def sensor_group(self):
        tok = self.peek()
        if tok.text not in SENSOR_GROUPS:
            self.error("expected periodicSensors, eventDrivenSensors or requestBasedSensors")
        self.advance()
        kind = SENSOR_GROUPS[tok.text]
        self.block(lambda: self.sensor(kind))

    def sensor(self, kind: SensorKind):
        name = self.ident("sensor name")
        parts: dict = {}

        def once(key, tok, value):
            if key in parts:
                self.report(tok.span, "DuplicateClause", f"{tok.text!r} given twice in {name.text!r}")
            parts[key] = value

        def stmt():
            tok = self.peek()
            if self.accept("generate"):
                gen = self.generate_clause()
                if kind is SensorKind.REQUEST_BASED:
                    once("key", tok, self.access_key())
                once("generate", tok, gen)
            elif kind is SensorKind.PERIODIC and self.accept("sample"):
                self.expect("period")
                period, ptok = self.number()
                self.expect("for")
                duration, dtok = self.number()
                if period <= 0:
                    self.report(ptok.span, "BadPeriod", "sample period must be positive")
                if duration <= 0:
                    self.report(dtok.span, "BadPeriod", "sampling duration must be positive")
                once("sample", tok, (float(period), float(duration)))
            elif kind is SensorKind.EVENT_DRIVEN and self.accept("onCondition"):
                once("condition", tok, self.expression())
            else:
                self.error(f"unexpected clause in {kind.value} sensor {name.text!r}")
            self.expect(";")

        self.block(stmt)
        if "generate" not in parts:
            self.report(name.span, "MissingGenerate", f"sensor {name.text!r} generates no event")
            return
        required = {SensorKind.PERIODIC: ("sample", "sample period ... for ..."),
                    SensorKind.EVENT_DRIVEN: ("condition", "onCondition"),
                    SensorKind.REQUEST_BASED: ("key", "accessed-by")}[kind]
        if required[0] not in parts:
            self.report(name.span, "MissingClause", f"sensor {name.text!r} lacks '{required[1]}'")
            return
        period, duration = parts.get("sample", (None, None))
        self.sensors.append(SensorDecl(
            name.text, kind, parts["generate"],
            sample_period=period, duration=duration,
            condition=parts.get("condition"), access_key=parts.get("key"), span=name.span))

    def access_key(self) -> KeyDecl:
        self.expect("accessed-by")
        key = self.ident("access key name")
        self.expect(":")
        ktype = self.type_name()
        return KeyDecl(key.text, ktype.text, key.span)

    def actuator(self) -> ActuatorDecl:
        name = self.ident("actuator name")
        actions: list[ActionDecl] = []

        def stmt():
            self.expect("action")
            aname = self.ident("action name")
            self.expect("(")
            params: list[FieldDecl] = []
            if not self.at(")"):
                while True:
                    pname = self.ident("parameter name")
                    self.expect(":")
                    ptype = self.type_name()
                    if any(p.name == pname.text for p in params):
                        self.report(pname.span, "DuplicateParam", f"parameter {pname.text!r} repeated")
                    params.append(FieldDecl(pname.text, ptype.text, pname.span))
                    if not self.accept(","):
                        break
            self.expect(")")
            self.expect(";")
            if any(a.name == aname.text for a in actions):
                self.report(aname.span, "DuplicateAction",
                            f"action {aname.text!r} declared twice on {name.text!r}")
            actions.append(ActionDecl(aname.text, tuple(params), aname.span))

        self.block(stmt)
        return ActuatorDecl(name.text, tuple(actions), name.span)

    def storage(self):
        name = self.ident("storage name")
        found = []

        def stmt():
            self.expect("generate")
            gen = self.generate_clause()
            key = self.access_key()
            self.expect(";")
            found.append((gen, key))

        self.block(stmt)
        if len(found) != 1:
            self.report(name.span, "StorageShape",
                        f"storage {name.text!r} must have exactly one 'generate ... accessed-by ...'")
            if not found:
                return StorageDecl(name.text, GenerateDecl("", ""), KeyDecl("", "String"), name.span)
        gen, key = found[0]
        return StorageDecl(name.text, gen, key, name.span)

    def check(self, spec: DomainSpec):
        self.check_unique_records(spec.records)
        seen = set()
        for res in spec.resources():
            if res.name in seen:
                self.report(res.span, "DuplicateResource", f"resource {res.name!r} declared twice")
            seen.add(res.name)
        known = {r.name for r in spec.records}
        gens = [g for t in spec.tags for g in t.generates]
        gens += [s.generates for s in spec.sensors]
        gens += [s.generates for s in spec.storages if s.generates.event]
        for g in gens:
            if g.payload_type not in known:
                self.report(g.type_span, "UnknownType", f"undeclared record type {g.payload_type!r}")


def parse_domain(text: str, file: str = "app.vocab.mydsl"):
    """Parse vocabulary text. Returns ``(DomainSpec | None, diagnostics)``."""
    p = DomainParser(text, file)
    spec = p.parse()
    return (None if p.failed else spec), p.diagnostics
