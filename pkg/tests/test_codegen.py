import json
import logging

import pytest
from hypothesis import given, settings

import strategies as gen
from iotforge.codegen import (
    GeneratedArtifact,
    Plugin,
    PluginRegistry,
    ServiceDescriptor,
    SourceStage,
    TargetKind,
    generate_all,
    generate_architecture_framework,
    generate_domain_framework,
    generate_ui_framework,
    list_plugins,
)
from iotforge.codegen.generate import handler_name, service_descriptor
from iotforge.codegen.templates import placeholders, render_template
from iotforge.errors import DuplicatePlugin, MissingBinding, TemplateSyntaxError, UnknownPlugin
from iotforge.model import ArchitectureSpec, DomainSpec
from iotforge.parsing import parse_architecture


# -- templates ----------------------------------------------------------------

@pytest.mark.parametrize("template, bindings, expected", [
    ("Hi {name}", {"name": "A"}, "Hi A"),
    ("{{literal}}", {}, "{literal}"),
    ("{a.b}", {"a": {"b": 3}}, "3"),
    ("{#each xs}{it};{/each}", {"xs": [1, 2]}, "1;2;"),
    ("{#each xs}{a}{k},{/each}", {"xs": [{"a": 1}, {"a": 2}], "k": "!"}, "1!,2!,"),
    ("top\n  {#each xs}\n- {it}\n  {/each}\nend\n", {"xs": ["x", "y"]}, "top\n- x\n- y\nend\n"),
    ("{#each xs}never{/each}", {"xs": []}, ""),
])
def test_render_template(template, bindings, expected):
    assert render_template(template, bindings) == expected


@pytest.mark.parametrize("template, error", [
    ("{nope}", MissingBinding),
    ("{a.c}", MissingBinding),
    ("{#each a}", TemplateSyntaxError),
    ("{/each}", TemplateSyntaxError),
])
def test_template_errors(template, error):
    with pytest.raises(error):
        render_template(template, {"a": {"b": 1}})


def test_placeholders_lists_top_level_names():
    assert placeholders("{a} {#each b}{c.d}{/each} {{e}}") == {"a", "b", "c"}


# -- plugins ------------------------------------------------------------------

def test_bundled_plugins():
    assert list_plugins() == ["neutral-scaffold", "sim-descriptor"]


def test_registry_errors():
    reg = PluginRegistry.default()
    with pytest.raises(DuplicatePlugin):
        reg.register(Plugin("sim-descriptor", TargetKind.SIM_DESCRIPTOR))
    with pytest.raises(UnknownPlugin):
        reg.get("java")
    reg.register(Plugin("custom", TargetKind.NEUTRAL_SCAFFOLD, {"sink": "{name} <- {event}\n"}))
    assert reg.ids()[-1] == "custom"


def test_plugin_templates_are_checked():
    with pytest.raises(TemplateSyntaxError):
        Plugin("bad", TargetKind.NEUTRAL_SCAFFOLD, {"sink": "{secret}"})
    with pytest.raises(TemplateSyntaxError):
        Plugin("bad", TargetKind.NEUTRAL_SCAFFOLD, {"gadget": "{name}"})


def test_unknown_plugin_name(projects):
    with pytest.raises(UnknownPlugin):
        generate_all(projects["fire"], "cobol")


def test_custom_plugin_is_used(projects):
    plugin = Plugin("brief", TargetKind.NEUTRAL_SCAFFOLD, {
        "driver": "{name}:{kind}\n", "service": "{name}\n", "sink": "{name} <- {event}\n"}, ".md")
    arts = generate_all(projects["fire"], plugin)
    by_path = {a.relative_path: a.content for a in arts}
    assert by_path["sinks/EndUserApp.md"] == b"EndUserApp <- fireNotify\n"
    assert by_path["drivers/SmokeDetector.md"] == b"SmokeDetector:eventDriven\n"


# -- frameworks ---------------------------------------------------------------

def test_neutral_scaffold_handlers(projects):
    arts = {a.relative_path: a for a in generate_all(projects["fire"], "neutral-scaffold")}
    text = arts["services/FireState.txt"].content.decode()
    assert "onNewsmokeMeasurement(event: SmokeStruct)" in text
    assert "onNewroomAvgTempMeasurement(event: TempStruct)" in text
    assert arts["services/FireState.txt"].source_stage is SourceStage.ARCHITECTURE
    hvac = {a.relative_path: a for a in generate_all(projects["hvac"], "neutral-scaffold")}
    assert "onNewprofileReceived" in hvac["services/Proximity.txt"].content.decode()


def test_handler_names():
    assert handler_name("smokeMeasurement") == "onNewsmokeMeasurement"
    assert handler_name("profile", response=True) == "onNewprofileReceived"


def test_artifact_counts_and_stages(projects):
    arts = generate_all(projects["fire"], "sim-descriptor")
    assert [a.relative_path for a in arts] == [
        "drivers/TemperatureSensor.json", "drivers/SmokeDetector.json", "drivers/Alarm.json",
        "services/RoomAvgTemp.json", "services/SmokeEventCounter.json", "services/FireState.json",
        "services/FireController.json", "sinks/EndUserApp.json"]
    assert [a.source_stage for a in arts].count(SourceStage.DOMAIN) == 3


@pytest.mark.parametrize("plugin", ["neutral-scaffold", "sim-descriptor"])
def test_generation_is_deterministic_with_unique_paths(projects, plugin):
    for project in projects.values():
        first = generate_all(project, plugin)
        assert first == generate_all(project, plugin)
        paths = [a.relative_path for a in first]
        assert len(paths) == len(set(paths))


def test_descriptor_json_is_canonical(projects):
    for art in generate_all(projects["hvac"], "sim-descriptor"):
        body = json.loads(art.content)
        assert art.content == (json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False)
                               + "\n").encode("utf-8")


def test_service_descriptor_fields(projects):
    arts = {a.relative_path: json.loads(a.content)
            for a in generate_all(projects["fire"], "sim-descriptor")}
    avg = arts["services/RoomAvgTemp.json"]
    assert avg["compute"] == {"operator": "AVG_BY_SAMPLE", "window": 5, "field": "tempValue"}
    assert avg["subscriptions"] == [{"event": "tempMeasurement", "scope": "SameLocation"}]
    assert arts["services/FireState.json"]["rule_ref"] == "rules/FireState.rules"
    assert arts["drivers/TemperatureSensor.json"]["sample_period_s"] == 1.0


def test_artifact_paths_must_be_relative():
    for bad in ("/abs.txt", "../up.txt", "a/../b.txt", "a//b.txt"):
        with pytest.raises(ValueError):
            GeneratedArtifact(bad, b"", SourceStage.DOMAIN)


def test_empty_inputs_generate_nothing():
    assert generate_domain_framework(DomainSpec(), "neutral-scaffold") == []
    assert generate_ui_framework(None, "neutral-scaffold") == []
    assert generate_architecture_framework(ArchitectureSpec(), DomainSpec(), "sim-descriptor") == []


def test_service_without_consumes_warns(projects, caplog):
    arch, diags = parse_architecture("computationalServices { Custom Idle { command On() to Alarm; } }")
    assert diags == []
    with caplog.at_level(logging.WARNING, logger="iotforge"):
        arts = generate_architecture_framework(arch, projects["fire"].domain, "neutral-scaffold")
    assert [a.relative_path for a in arts] == ["services/Idle.txt"]
    assert "Idle" in caplog.text


@settings(max_examples=200)
@given(gen.architecture_specs())
def test_service_descriptor_round_trip(arch):
    for svc in arch.services:
        desc = service_descriptor(svc, DomainSpec(), arch)
        again = ServiceDescriptor.from_dict(json.loads(json.dumps(desc.to_dict())))
        assert again == desc
        assert again.to_decl() == svc
