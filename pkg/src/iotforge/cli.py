"""Command-line entry point: check, build, map, link, run and pipeline.

Exit codes: 0 success, 1 domain error (invalid specs, unknown plug-in,
mapping or runtime failure), 2 usage or project-layout error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .codegen import generate_all, list_plugins
from .errors import IoTForgeError, LayoutError
from .linker import link, read_packages, write_packages
from .mapper import MapperConfig, MappingPlan, map_services
from .model import Diagnostic, has_errors
from .project import CORPORA, ProjectLayout, corpus_path, load_project
from .runtime import load_seeds, load_traces, run_simulation

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

_SUMMARY_KINDS = ("Publish", "Deliver", "Command", "Notify", "Request", "Response",
                  "StateChange", "RuleError")


class _Failed(Exception):
    """Stop a command with a given exit code; the message is already printed."""

    def __init__(self, code: int):
        self.code = code


def _color(text: str, code: str, stream) -> str:
    if os.environ.get("IOTFORGE_NO_COLOR") or not stream.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _print_diagnostics(diags: list[Diagnostic], fmt: str):
    err = sys.stderr
    if fmt == "json":
        body = [{"severity": d.severity.value, "code": d.code, "message": d.message,
                 "file": d.span.file, "line": d.span.line, "column": d.span.column}
                for d in diags]
        print(json.dumps(body, indent=2), file=err)
        return
    for d in diags:
        print(_color(d.render(), "31" if d.is_error else "33", err), file=err)


def _root(args) -> Path:
    return corpus_path(args.corpus) if args.corpus else Path(args.root)


def _load(args):
    project, diags = load_project(_root(args))
    _print_diagnostics(diags, args.format)
    if project is None or has_errors(diags):
        raise _Failed(EXIT_DOMAIN)
    return project


def _plan(args, project) -> MappingPlan:
    if getattr(args, "plan", None):
        return MappingPlan.from_json(Path(args.plan).read_bytes())
    return map_services(project, MapperConfig(args.seed, args.strategy))


def _summary(log) -> str:
    counts = log.counts()
    width = max(len(k) for k in _SUMMARY_KINDS)
    lines = [f"{'entry':<{width}}  count"]
    lines += [f"{k:<{width}}  {counts.get(k, 0)}" for k in _SUMMARY_KINDS]
    return "\n".join(lines)


def cmd_check(args) -> int:
    _load(args)
    return EXIT_OK


def cmd_build(args) -> int:
    project = _load(args)
    out = Path(args.out)
    for art in generate_all(project, args.plugin):
        path = out / art.relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(art.content)
        print(path)
    return EXIT_OK


def cmd_map(args) -> int:
    project = _load(args)
    data = map_services(project, MapperConfig(args.seed, args.strategy)).to_json()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def cmd_link(args) -> int:
    project = _load(args)
    packages = link(project, _plan(args, project), generate_all(project, "sim-descriptor"))
    write_packages(packages, args.out)
    for pkg in packages:
        print(Path(args.out) / pkg.device)
    return EXIT_OK


def _run(args, packages) -> int:
    layout = ProjectLayout(_root(args))
    log = run_simulation(packages, load_traces(layout.path("traces")),
                         load_seeds(layout.path("seeds")), args.until)
    if args.log:
        Path(args.log).parent.mkdir(parents=True, exist_ok=True)
        log.write(args.log)
    print(_summary(log))
    return EXIT_OK


def cmd_run(args) -> int:
    project = _load(args)
    if args.packages:
        packages = read_packages(args.packages)
    else:
        packages = link(project, _plan(args, project), generate_all(project, "sim-descriptor"))
    return _run(args, packages)


def cmd_pipeline(args) -> int:
    """check, build, map, link and run in order; stop at the first failure."""
    out = Path(args.out)
    project = _load(args)
    print("check: ok")
    out.mkdir(parents=True, exist_ok=True)
    build_dir = out / "build"
    for art in generate_all(project, "sim-descriptor"):
        path = build_dir / art.relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(art.content)
    print(f"build: {build_dir}")
    plan = map_services(project, MapperConfig(args.seed, args.strategy))
    (out / "plan.json").write_bytes(plan.to_json())
    print(f"map: {out / 'plan.json'}")
    packages_dir = out / "packages"
    write_packages(link(project, plan, generate_all(project, "sim-descriptor")), packages_dir)
    print(f"link: {packages_dir}")
    args.log = args.log or str(out / "run.jsonl")
    print(f"run: {args.log}")
    return _run(args, read_packages(packages_dir))


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iotforge", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("root", nargs="?", help="project directory")
    common.add_argument("--corpus", choices=CORPORA, help="use a bundled case study instead of ROOT")
    common.add_argument("--format", choices=("text", "json"), default="text",
                        help="diagnostic output format (default: text)")
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=_u64, default=0, help="mapper seed (default: 0)")
    seeded.add_argument("--strategy", default="random", help="mapping strategy (default: random)")
    timed = argparse.ArgumentParser(add_help=False)
    timed.add_argument("--until", type=int, default=None, help="stop after this virtual time in ms")
    timed.add_argument("--log", help="write the run log (JSON Lines) here")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="parse and validate the specs")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("build", parents=[common], help="generate frameworks with a plug-in")
    p.add_argument("--plugin", default="sim-descriptor", help=f"one of {', '.join(list_plugins())}")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_build)
    p = sub.add_parser("map", parents=[common, seeded], help="assign services to devices")
    p.add_argument("--out", help="write the plan here instead of standard output")
    p.set_defaults(func=cmd_map)
    p = sub.add_parser("link", parents=[common, seeded], help="write per-device packages")
    p.add_argument("--plan", help="use this plan file instead of mapping")
    p.add_argument("--out", required=True, help="package output directory")
    p.set_defaults(func=cmd_link)
    p = sub.add_parser("run", parents=[common, seeded, timed], help="simulate the application")
    p.add_argument("--packages", help="run a linked package tree instead of linking in memory")
    p.add_argument("--plan", help="use this plan file instead of mapping")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("pipeline", parents=[common, seeded, timed], help="check, build, map, link, run")
    p.add_argument("--out", required=True, help="directory for every pipeline output")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if (args.root is None) == (args.corpus is None):
        parser.error("give exactly one of ROOT or --corpus")
    try:
        return args.func(args)
    except _Failed as stop:
        return stop.code
    except LayoutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IoTForgeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
