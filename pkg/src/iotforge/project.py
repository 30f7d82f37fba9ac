"""On-disk project layout and loading."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import LayoutError
from .model import Diagnostic, LogicRuleSet, has_errors
from .parsing import (
    parse_architecture,
    parse_deployment,
    parse_domain,
    parse_logic_rules,
    parse_userinteraction,
)
from .validate import Project, validate_project

CORPORA = ("hvac", "fire", "smarthome")


@dataclass(frozen=True)
class ProjectLayout:
    root: Path
    vocab: str = "app.vocab.mydsl"
    arch: str = "app.arch.mydsl"
    ui: str = "app.ui.mydsl"
    deploy: str = "app.deploy.mydsl"
    rules: str = "app.rules"
    traces: str = "traces"
    seeds: str = "seeds"

    def path(self, name: str) -> Path:
        return self.root / getattr(self, name)

    def check(self):
        missing = [getattr(self, n) for n in ("vocab", "arch", "deploy") if not self.path(n).is_file()]
        if missing:
            raise LayoutError(f"{self.root}: missing mandatory file(s): {', '.join(missing)}")


def corpus_path(name: str) -> Path:
    """Directory of a bundled case study (``hvac``, ``fire`` or ``smarthome``)."""
    if name not in CORPORA:
        raise KeyError(name)
    return Path(str(resources.files("iotforge.corpus") / name))


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def load_project(root) -> tuple[Optional[Project], list[Diagnostic]]:
    """Parse and validate every spec under ``root``.

    Returns the project only when no Error diagnostic was produced. Raises
    LayoutError if a mandatory file is missing.
    """
    layout = ProjectLayout(Path(root))
    layout.check()
    diagnostics: list[Diagnostic] = []

    def parse(parser, name):
        path = layout.path(name)
        spec, diags = parser(_read(path), str(path))
        diagnostics.extend(diags)
        return spec

    domain = parse(parse_domain, "vocab")
    arch = parse(parse_architecture, "arch")
    deploy = parse(parse_deployment, "deploy")
    ui = parse(parse_userinteraction, "ui") if layout.path("ui").is_file() else None
    rules = parse(parse_logic_rules, "rules") if layout.path("rules").is_file() else LogicRuleSet()
    if has_errors(diagnostics) or None in (domain, arch, deploy, rules) \
            or (ui is None and layout.path("ui").is_file()):
        return None, sorted(diagnostics, key=Diagnostic.sort_key)
    project = Project(domain=domain, arch=arch, deploy=deploy, ui=ui, rules=rules)
    diagnostics.extend(validate_project(project))
    diagnostics.sort(key=Diagnostic.sort_key)
    return (None if has_errors(diagnostics) else project), diagnostics
