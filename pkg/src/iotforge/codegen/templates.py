"""A small text-template engine.

Syntax:
    {name}              substitute a binding (dotted paths reach into dicts)
    {#each items}...{/each}
                        repeat the body once per list item; dict items add
                        their keys to the scope, scalars are bound as {it}
    {{  }}              literal braces

A block tag alone on its line swallows that line, so templates can keep
readable layout. Templates never include other templates.
"""

from __future__ import annotations

import re
from collections import ChainMap

from ..errors import MissingBinding, TemplateSyntaxError

_STANDALONE = re.compile(r"^[ \t]*(\{#each [A-Za-z_][\w.]*\}|\{/each\})[ \t]*\n", re.MULTILINE)
_TOKEN = re.compile(r"\{\{|\}\}|\{#each ([A-Za-z_][\w.]*)\}|\{/each\}|\{([A-Za-z_][\w.]*)\}")


def _parse(template: str):
    """Return a node list: str | ("var", name) | ("each", name, body)."""
    source = _STANDALONE.sub(r"\1", template)
    stack: list[tuple[str | None, list]] = [(None, [])]
    pos = 0
    for m in _TOKEN.finditer(source):
        nodes = stack[-1][1]
        if m.start() > pos:
            nodes.append(source[pos:m.start()])
        pos = m.end()
        tok = m.group(0)
        if tok == "{{":
            nodes.append("{")
        elif tok == "}}":
            nodes.append("}")
        elif m.group(1):
            stack.append((m.group(1), []))
        elif tok == "{/each}":
            if len(stack) == 1:
                raise TemplateSyntaxError("{/each} without matching {#each}")
            name, body = stack.pop()
            stack[-1][1].append(("each", name, body))
        else:
            nodes.append(("var", m.group(2)))
    if len(stack) != 1:
        raise TemplateSyntaxError(f"unclosed {{#each {stack[-1][0]}}}")
    if pos < len(source):
        stack[0][1].append(source[pos:])
    return stack[0][1]


def _lookup(scope, path: str):
    head, *rest = path.split(".")
    if head not in scope:
        raise MissingBinding(path)
    value = scope[head]
    for part in rest:
        if not isinstance(value, dict) or part not in value:
            raise MissingBinding(path)
        value = value[part]
    return value


def _render(nodes, scope, out: list[str]):
    for node in nodes:
        if isinstance(node, str):
            out.append(node)
        elif node[0] == "var":
            out.append(str(_lookup(scope, node[1])))
        else:
            items = _lookup(scope, node[1])
            for item in items:
                inner = item if isinstance(item, dict) else {"it": item}
                _render(node[2], scope.new_child(inner), out)


def render_template(template: str, bindings: dict) -> str:
    out: list[str] = []
    _render(_parse(template), ChainMap(dict(bindings)), out)
    return "".join(out)


def placeholders(template: str) -> set[str]:
    """Top-level names a template reads (loop-local names included)."""
    names = set()

    def visit(nodes):
        for node in nodes:
            if isinstance(node, tuple):
                names.add(node[1].split(".")[0])
                if node[0] == "each":
                    visit(node[2])

    visit(_parse(template))
    return names
