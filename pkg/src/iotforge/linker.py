"""Bundle descriptors, rules and the mapping plan into per-device packages."""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .codegen.descriptors import DriverDescriptor, ServiceDescriptor, SinkDescriptor, dump_json
from .codegen.generate import GeneratedArtifact
from .errors import MissingDescriptor, PlanSpecMismatch
from .mapper import MappingPlan
from .model import ServiceKind
from .validate import Project


@dataclass(frozen=True)
class Manifest:
    device: str
    location: str
    platform: Optional[str]
    protocol: Optional[str]
    database: Optional[str]
    order: int = 0  # position in the deployment spec

    def to_dict(self) -> dict:
        return {"device": self.device, "location": self.location, "platform": self.platform,
                "protocol": self.protocol, "database": self.database, "order": self.order}


@dataclass(frozen=True)
class DevicePackage:
    device: str
    manifest: Manifest
    services: tuple[ServiceDescriptor, ...] = ()
    drivers: tuple[DriverDescriptor, ...] = ()
    sinks: tuple[SinkDescriptor, ...] = ()
    rules: tuple[tuple[str, str], ...] = ()  # (service, verbatim rules text)

    def manifest_dict(self) -> dict:
        body = self.manifest.to_dict()
        body["services"] = [s.service for s in self.services]
        body["drivers"] = [d.name for d in self.drivers]
        body["sinks"] = [s.interactor for s in self.sinks]
        return body


def _index(artifacts) -> dict[str, dict]:
    by_folder: dict[str, dict] = {"services": {}, "drivers": {}, "sinks": {}}
    for a in artifacts:
        folder, _, filename = a.relative_path.partition("/")
        if folder in by_folder and filename.endswith(".json"):
            by_folder[folder][filename.removesuffix(".json")] = json.loads(a.content)
    return by_folder


def link(project: Project, plan: MappingPlan, artifacts: list[GeneratedArtifact]) -> list[DevicePackage]:
    """One package per deployment device; a pure function of its inputs."""
    devices = {d.name: d for d in project.deploy.devices}
    expected = [s.name for s in project.arch.services] + [i.name for i in project.interactors]
    if set(plan.assignments) != set(expected):
        missing = sorted(set(expected) - set(plan.assignments))
        extra = sorted(set(plan.assignments) - set(expected))
        raise PlanSpecMismatch(f"plan does not cover the project (missing {missing}, unknown {extra})")
    unknown = sorted({d for d in plan.assignments.values() if d not in devices})
    if unknown:
        raise PlanSpecMismatch(f"plan names unknown device(s): {', '.join(unknown)}")

    index = _index(artifacts)

    def descriptor(folder, name, cls):
        try:
            return cls.from_dict(index[folder][name])
        except KeyError:
            raise MissingDescriptor(name) from None

    resource_names = {r.name for r in project.domain.resources()}
    packages = []
    for order, dev in enumerate(project.deploy.devices):
        hosted = set(plan.hosted_on(dev.name))
        services = tuple(descriptor("services", s.name, ServiceDescriptor)
                         for s in project.arch.services if s.name in hosted)
        sinks = tuple(descriptor("sinks", i.name, SinkDescriptor)
                      for i in project.interactors if i.name in hosted)
        drivers = tuple(descriptor("drivers", name, DriverDescriptor)
                        for name in dev.resource_names if name in resource_names)
        rules = []
        for s in project.arch.services:
            block = project.rules.for_service(s.name)
            if s.name in hosted and s.kind is ServiceKind.CUSTOM and block is not None:
                rules.append((s.name, block.source))
        manifest = Manifest(dev.name, dev.location, dev.platform, dev.protocol, dev.database, order)
        packages.append(DevicePackage(dev.name, manifest, services, drivers, sinks, tuple(rules)))
    return packages


def write_packages(packages: list[DevicePackage], out_dir) -> list[Path]:
    """Write ``out_dir/<device>/...``; each device directory is replaced wholesale."""
    out = Path(out_dir)
    written = []

    def put(path: Path, data: bytes):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        written.append(path)

    for pkg in packages:
        root = out / pkg.device
        if root.exists():
            shutil.rmtree(root)
        root.mkdir(parents=True)
        put(root / "manifest.json", dump_json(pkg.manifest_dict()))
        for s in pkg.services:
            put(root / "services" / f"{s.service}.json", dump_json(s.to_dict()))
        for d in pkg.drivers:
            put(root / "drivers" / f"{d.name}.json", dump_json(d.to_dict()))
        for s in pkg.sinks:
            put(root / "sinks" / f"{s.interactor}.json", dump_json(s.to_dict()))
        for service, text in pkg.rules:
            put(root / "rules" / f"{service}.rules", text.encode("utf-8"))
    return written


def read_packages(out_dir) -> list[DevicePackage]:
    """Load a tree written by ``write_packages``, devices in deployment order."""
    packages = []
    for root in sorted(p for p in Path(out_dir).iterdir() if (p / "manifest.json").is_file()):
        m = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
        manifest = Manifest(m["device"], m["location"], m["platform"], m["protocol"], m["database"],
                            m["order"])

        def load(folder, names, cls):
            return tuple(cls.from_dict(json.loads((root / folder / f"{n}.json").read_text(encoding="utf-8")))
                         for n in names)

        services = load("services", m["services"], ServiceDescriptor)
        rules = tuple((s.service, (root / "rules" / f"{s.service}.rules").read_text(encoding="utf-8"))
                      for s in services if (root / "rules" / f"{s.service}.rules").is_file())
        packages.append(DevicePackage(m["device"], manifest, services,
                                      load("drivers", m["drivers"], DriverDescriptor),
                                      load("sinks", m["sinks"], SinkDescriptor), rules))
    return sorted(packages, key=lambda p: p.manifest.order)
