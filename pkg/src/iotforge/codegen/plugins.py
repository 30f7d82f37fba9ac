"""Generator plug-ins and their registry.

A plug-in is a set of named text templates plus the kind of output it makes.
Two ship with the package: ``neutral-scaffold`` (human-readable skeletons)
and ``sim-descriptor`` (JSON consumed by the linker and simulator).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from types import MappingProxyType

from ..errors import DuplicatePlugin, TemplateSyntaxError, UnknownPlugin
from .templates import placeholders


class TargetKind(str, Enum):
    NEUTRAL_SCAFFOLD = "NeutralScaffold"
    SIM_DESCRIPTOR = "SimDescriptor"


# Names each template may read. Loop-local names count too.
PLACEHOLDERS = MappingProxyType({
    "driver": frozenset({"plugin", "name", "kind", "events", "event", "type",
                         "actions", "params", "notes", "it"}),
    "service": frozenset({"plugin", "name", "kind", "handlers", "handler", "arg", "type",
                          "publications", "event", "requests", "target", "key",
                          "commands", "actuator", "action", "params", "notes", "it"}),
    "sink": frozenset({"plugin", "name", "event", "type", "fields"}),
})


@dataclass(frozen=True)
class Plugin:
    id: str
    target_kind: TargetKind
    templates: dict = field(default_factory=dict, compare=False)
    extension: str = ".txt"

    def __post_init__(self):
        for name, text in self.templates.items():
            if name not in PLACEHOLDERS:
                raise TemplateSyntaxError(f"{self.id}: unknown template {name!r}")
            extra = placeholders(text) - PLACEHOLDERS[name]
            if extra:
                raise TemplateSyntaxError(
                    f"{self.id}/{name}: placeholders outside the allowed set: {sorted(extra)}")


def _bundled_templates(plugin_id: str) -> dict:
    root = resources.files("iotforge.codegen") / "plugin_templates" / plugin_id
    return {p.name.removesuffix(".tmpl"): p.read_text(encoding="utf-8")
            for p in sorted(root.iterdir(), key=lambda p: p.name) if p.name.endswith(".tmpl")}


class PluginRegistry:
    def __init__(self, plugins=()):
        self._plugins: dict[str, Plugin] = {}
        for p in plugins:
            self.register(p)

    @classmethod
    def default(cls) -> "PluginRegistry":
        return cls([
            Plugin("neutral-scaffold", TargetKind.NEUTRAL_SCAFFOLD,
                   _bundled_templates("neutral-scaffold"), ".txt"),
            Plugin("sim-descriptor", TargetKind.SIM_DESCRIPTOR, {}, ".json"),
        ])

    def register(self, plugin: Plugin):
        if plugin.id in self._plugins:
            raise DuplicatePlugin(plugin.id)
        self._plugins[plugin.id] = plugin

    def get(self, plugin) -> Plugin:
        if isinstance(plugin, Plugin):
            return plugin
        try:
            return self._plugins[plugin]
        except KeyError:
            raise UnknownPlugin(plugin) from None

    def ids(self) -> list[str]:
        return list(self._plugins)


REGISTRY = PluginRegistry.default()


def list_plugins() -> list[str]:
    return REGISTRY.ids()


def register_plugin(plugin: Plugin):
    REGISTRY.register(plugin)
