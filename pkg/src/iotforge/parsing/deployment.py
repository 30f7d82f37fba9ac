"""Parser for the deployment language (``*.deploy.mydsl``)."""

from __future__ import annotations

from ..model import DeploymentSpec, DeviceDecl, NameRef
from .base import Parser, _Bail
from .lexer import TokenKind, unquote

_SIMPLE_PROPS = {"language-platform": "platform", "protocol": "protocol", "database": "database"}


class DeploymentParser(Parser):
    def parse(self) -> DeploymentSpec:
        self.devices: list[DeviceDecl] = []
        try:
            self.expect("devices")
            self.block(self.device)
            self.finish()
        except _Bail:
            pass
        spec = DeploymentSpec(tuple(self.devices))
        seen = set()
        for d in spec.devices:
            if d.name in seen:
                self.report(d.span, "DuplicateDevice", f"device {d.name!r} declared twice")
            seen.add(d.name)
        return spec

    def device(self):
        name = self.ident("device name")
        props: dict = {}

        def stmt():
            tok = self.peek()
            if self.accept("location"):
                self.expect(":")
                loc = self.peek()
                if loc.kind is not TokenKind.STRING:
                    self.error("expected a quoted location path")
                self.advance()
                value = unquote(loc.text)
                if not value:
                    self.report(loc.span, "EmptyLocation", "location must not be empty")
                key = "location"
            elif self.accept("resources"):
                self.expect(":")
                value = []
                if not self.at(";"):
                    while True:
                        ref = self.ident("resource or service name")
                        value.append(NameRef(ref.text, ref.span))
                        if not self.accept(","):
                            break
                key = "resources"
            elif tok.text in _SIMPLE_PROPS and tok.kind is TokenKind.KEYWORD:
                self.advance()
                self.expect(":")
                value = self.ident(f"{tok.text} value").text
                key = _SIMPLE_PROPS[tok.text]
            else:
                self.error("expected location, resources, language-platform, protocol or database")
            self.expect(";")
            if key in props:
                self.report(tok.span, "DuplicateProperty", f"{tok.text!r} given twice for {name.text!r}")
            props[key] = value

        self.block(stmt)
        if "location" not in props:
            self.report(name.span, "MissingLocation", f"device {name.text!r} has no location")
            return
        if "protocol" not in props:
            self.report(name.span, "MissingProtocol", f"device {name.text!r} has no protocol")
            return
        resources = tuple(props.get("resources", ()))
        if not resources and not props.get("platform"):
            self.report(name.span, "EmptyDevice",
                        f"device {name.text!r} hosts no resources and declares no platform")
        self.devices.append(DeviceDecl(
            name.text, props["location"], resources, props.get("platform"),
            props["protocol"], props.get("database"), name.span))


def parse_deployment(text: str, file: str = "app.deploy.mydsl"):
    """Parse deployment text. Returns ``(DeploymentSpec | None, diagnostics)``."""
    p = DeploymentParser(text, file)
    spec = p.parse()
    return (None if p.failed else spec), p.diagnostics
