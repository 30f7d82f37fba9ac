"""Model-driven IoT application toolchain: parse, validate, generate, map, link, simulate."""

from .codegen import (
    generate_architecture_framework,
    generate_domain_framework,
    generate_ui_framework,
    list_plugins,
    render_template,
)
from .formatting import format_spec
from .linker import link, read_packages, write_packages
from .mapper import MapperConfig, MappingPlan, map_services, register_strategy
from .parsing import (
    parse_architecture,
    parse_deployment,
    parse_domain,
    parse_logic_rules,
    parse_userinteraction,
)
from .project import corpus_path, load_project
from .runtime import compute_common, eval_expr, run_simulation
from .validate import Project, dataflow_graph, validate_project

__all__ = [
    "MapperConfig", "MappingPlan", "Project", "compute_common", "corpus_path", "dataflow_graph",
    "eval_expr", "format_spec", "generate_architecture_framework", "generate_domain_framework",
    "generate_ui_framework", "link", "list_plugins", "load_project", "map_services",
    "parse_architecture", "parse_deployment", "parse_domain", "parse_logic_rules",
    "parse_userinteraction", "read_packages", "register_strategy", "render_template",
    "run_simulation", "validate_project", "write_packages",
]
