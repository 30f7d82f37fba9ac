from .descriptors import DriverDescriptor, ServiceDescriptor, SinkDescriptor, dump_json
from .generate import (
    GeneratedArtifact,
    SourceStage,
    generate_all,
    generate_architecture_framework,
    generate_domain_framework,
    generate_ui_framework,
    handler_name,
)
from .plugins import PLACEHOLDERS, Plugin, PluginRegistry, TargetKind, list_plugins, register_plugin
from .templates import placeholders, render_template

__all__ = [
    "DriverDescriptor", "GeneratedArtifact", "PLACEHOLDERS", "Plugin", "PluginRegistry",
    "ServiceDescriptor", "SinkDescriptor", "SourceStage", "TargetKind", "dump_json",
    "generate_all", "generate_architecture_framework", "generate_domain_framework",
    "generate_ui_framework", "handler_name", "list_plugins", "placeholders",
    "register_plugin", "render_template",
]
