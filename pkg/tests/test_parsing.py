import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import strategies as gen
from iotforge.formatting import format_expr
from iotforge.model import Binary, FieldRef, Literal, Scope, SensorKind, ServiceKind, Unary
from iotforge.parsing import (
    TokenKind,
    parse_architecture,
    parse_deployment,
    parse_domain,
    parse_logic_rules,
    parse_userinteraction,
    tokenize,
)
from iotforge.parsing.base import parse_expr


def codes(diags):
    return [d.code for d in diags]


# -- lexer --------------------------------------------------------------------

@settings(max_examples=300)
@given(st.text(alphabet=st.characters(codec="utf-8", exclude_categories=["Cs"]), max_size=80))
def test_tokens_are_lossless_and_positioned(text):
    tokens = tokenize(text, "f")
    assert tokens[-1].kind is TokenKind.EOF
    cursor = 0
    for tok in tokens:
        assert text[tok.offset:tok.end] == tok.text
        gap = text[cursor:tok.offset]
        assert gap.strip(" \t\r\f\v\n") == ""
        line_start = text.rfind("\n", 0, tok.offset) + 1
        assert tok.span.line == text.count("\n", 0, tok.offset) + 1
        assert tok.span.column == tok.offset - line_start + 1
        assert tok.span.length == len(tok.text)
        cursor = tok.end
    assert text[cursor:].strip(" \t\r\f\v\n") == ""


def test_keywords_comments_and_hyphen_words():
    toks = tokenize('accessed-by language-platform accessed // note\n"s\\"x" 3.5 1e3 Room#1')
    kinds = [(t.kind, t.text) for t in toks[:-1]]
    assert kinds == [
        (TokenKind.KEYWORD, "accessed-by"), (TokenKind.KEYWORD, "language-platform"),
        (TokenKind.IDENT, "accessed"), (TokenKind.COMMENT, "// note"),
        (TokenKind.STRING, '"s\\"x"'), (TokenKind.NUMBER, "3.5"), (TokenKind.NUMBER, "1e3"),
        (TokenKind.IDENT, "Room#1"),
    ]


def test_bad_character_and_unterminated_string_are_diagnosed():
    _, diags = parse_domain('resources { structs { A { x: long; } } } @')
    assert "BadCharacter" in codes(diags)
    _, diags = parse_deployment('devices { D { location: "home; protocol: mqtt; } }')
    assert "UnterminatedString" in codes(diags)


# -- expressions --------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("a + b * c", Binary("+", FieldRef(None, "a"), Binary("*", FieldRef(None, "b"), FieldRef(None, "c")))),
    ("a - b - c", Binary("-", Binary("-", FieldRef(None, "a"), FieldRef(None, "b")), FieldRef(None, "c"))),
    ("!a && b || c", Binary("||", Binary("&&", Unary("!", FieldRef(None, "a")), FieldRef(None, "b")),
                            FieldRef(None, "c"))),
    ("x > 650", Binary(">", FieldRef(None, "x"), Literal(650, "long"))),
    ("-5", Literal(-5, "long")),
    ("-event.v", Unary("-", FieldRef("event", "v"))),
    ("state.t >= 50.0", Binary(">=", FieldRef("state", "t"), Literal(50.0, "double"))),
])
def test_expression_precedence(text, expected):
    expr, diags = parse_expr(text)
    assert not diags and expr == expected


def test_unbalanced_paren_and_bad_root():
    _, diags = parse_expr("a && (b")
    assert codes(diags) == ["UnbalancedParen"]
    _, diags = parse_expr("thing.field > 1")
    assert "BadFieldRef" in codes(diags)


@settings(max_examples=300)
@given(gen.expressions)
def test_expression_format_round_trip(expr):
    text = format_expr(expr)
    back, diags = parse_expr(text)
    assert not diags and back == expr


def test_minimal_parentheses():
    expr, _ = parse_expr("(a + b) * c - (d - e)")
    assert format_expr(expr) == "(a + b) * c - (d - e)"
    expr, _ = parse_expr("((a)) + (b * c)")
    assert format_expr(expr) == "a + b * c"


# -- domain -------------------------------------------------------------------

FIRE_DOMAIN = """
resources {
  structs {
    TempStruct { tempValue: double; unitOfMeasurement: String; }
  }
  sensors {
    periodicSensors {
      TemperatureSensor { generate tempMeasurement: TempStruct; sample period 1 for 360; }
    }
    eventDrivenSensors {
      SmokeDetector { generate smoke: TempStruct; onCondition tempValue > 650; }
    }
  }
  actuators { Alarm { action On(); action Set(level: long, label: String); } }
}
"""


def test_domain_declarations():
    spec, diags = parse_domain(FIRE_DOMAIN)
    assert diags == []
    periodic, event = spec.sensors
    assert periodic.kind is SensorKind.PERIODIC and (periodic.sample_period, periodic.duration) == (1.0, 360.0)
    assert event.condition == Binary(">", FieldRef(None, "tempValue"), Literal(650, "long"))
    assert [(p.name, p.type) for p in spec.actuator("Alarm").action("Set").params] == \
        [("level", "long"), ("label", "String")]


@pytest.mark.parametrize("text, code", [
    ("resources { structs { A { x: long; x: double; } } }", "DuplicateField"),
    ("resources { structs { A { } A { } } }", "DuplicateRecord"),
    ("resources { structs { A { x: bool; } } }", "Syntax"),
    ("resources { tags { T { } } }", "MissingGenerate"),
    ("resources { structs { A { } } sensors { periodicSensors { S { generate e: A; } } } }", "MissingClause"),
    ("resources { structs { A { } } sensors { periodicSensors { S { generate e: A; sample period 0 for 5; } } } }",
     "BadPeriod"),
    ("resources { structs { A { } } sensors { periodicSensors { S { generate e: B; sample period 1 for 5; } } } }",
     "UnknownType"),
    ("resources { actuators { H { action On(); action On(); } } }", "DuplicateAction"),
    ("resources { actuators { H { action Set(a: long, a: long); } } }", "DuplicateParam"),
    ("resources { actuators { H { } H { } } }", "DuplicateResource"),
    ("resources { storages { S { } } }", "StorageShape"),
])
def test_domain_errors(text, code):
    _, diags = parse_domain(text)
    assert code in codes(diags)


def test_unexpected_eof_reported_once():
    _, diags = parse_domain("resources { structs {")
    assert codes(diags) == ["UnexpectedEOF"]


def test_recovery_reports_several_errors():
    text = """resources {
      structs { A { x: ; y: long; } B { z: nope; } }
      actuators { H { action On(; } }
    }"""
    spec, diags = parse_domain(text)
    assert len([d for d in diags if d.is_error]) >= 3
    assert spec is None
    assert [d.span.line for d in diags] == sorted(d.span.line for d in diags)


# -- architecture -------------------------------------------------------------

def test_architecture_statements():
    spec, diags = parse_architecture("""
    computationalServices {
      Common RoomAvgTemp { consume tempMeasurement from region; COMPUTE AVG_BY_SAMPLE(5) on tempValue;
                           generate avg: TempStruct; }
      Custom Proximity { consume badge from global; request ProfileDB; command Off() to Heater;
                         command SetTemp(21.5) to Heater; generate pref: TempStruct; }
    }""")
    assert diags == []
    avg, prox = spec.services
    assert avg.kind is ServiceKind.COMMON and avg.compute.window == 5
    assert avg.consumes[0].scope is Scope.SAME_LOCATION and prox.consumes[0].scope is Scope.GLOBAL
    assert [r.name for r in prox.requests] == ["ProfileDB"]
    assert prox.commands[1].args == (Literal(21.5, "double"),)


@pytest.mark.parametrize("body, code", [
    ("Common A { consume x; generate y: T; }", "MissingCompute"),
    ("Common A { consume x; consume z; COMPUTE SUM_BY_SAMPLE(2) on v; generate y: T; }", "CommonShape"),
    ("Custom A { consume x; COMPUTE SUM_BY_SAMPLE(2) on v; }", "UnexpectedCompute"),
    ("Common A { consume x; COMPUTE AVG_BY_SAMPLE(0) on v; generate y: T; }", "BadWindow"),
    ("Custom A { consume x; generate x: T; }", "SelfLoop"),
    ("Custom A { } Custom A { }", "DuplicateService"),
])
def test_architecture_errors(body, code):
    _, diags = parse_architecture(f"computationalServices {{ {body} }}")
    assert code in codes(diags)


# -- user interaction and deployment ------------------------------------------

def test_userinteraction():
    spec, diags = parse_userinteraction(
        "userInteractions { structs { N { msg: String; } } resources { App { notify alert: N; } } }")
    assert diags == [] and spec.interactor("App").payload.event == "alert"
    _, diags = parse_userinteraction("userInteractions { resources { App { } App { notify a: N; } } }")
    assert {"InteractorShape"} <= set(codes(diags))
    _, diags = parse_userinteraction(
        "userInteractions { resources { App { notify a: N; } App { notify a: N; } } }")
    assert "DuplicateInteractor" in codes(diags)


def test_deployment():
    spec, diags = parse_deployment("""devices {
      D1 { location: "home/room#1"; resources: A, B; language-platform: NodeJS; protocol: mqtt; }
      D2 { location: "home/server"; resources: DB; protocol: mqtt; database: MySQL; }
    }""")
    assert diags == []
    assert spec.device("D1").resource_names == ("A", "B") and spec.device("D1").platform == "NodeJS"
    assert spec.device("D2").database == "MySQL" and spec.device("D2").platform is None


@pytest.mark.parametrize("body, code", [
    ("D { resources: A; protocol: mqtt; }", "MissingLocation"),
    ('D { location: "x"; resources: A; }', "MissingProtocol"),
    ('D { location: "x"; protocol: mqtt; }', "EmptyDevice"),
    ('D { location: ""; resources: A; protocol: mqtt; }', "EmptyLocation"),
    ('D { location: "x"; location: "y"; resources: A; protocol: mqtt; }', "DuplicateProperty"),
    ('D { location: "x"; resources: A; protocol: mqtt; } D { location: "x"; resources: A; protocol: mqtt; }',
     "DuplicateDevice"),
])
def test_deployment_errors(body, code):
    _, diags = parse_deployment(f"devices {{ {body} }}")
    assert code in codes(diags)


# -- rules --------------------------------------------------------------------

def test_rules_and_verbatim_source():
    text = ("// header\nservice S {\n  on e when event.v > 1 -> emit out(v = event.v), set last = event.v;\n"
            "  on response r -> command H.Set(level = response.l), notify App(msg = \"hi\");\n}\n")
    spec, diags = parse_logic_rules(text)
    assert diags == []
    block = spec.for_service("S")
    assert [r.trigger.kind for r in block.rules] == ["event", "response"]
    assert block.source == text[text.index("service"):]


def test_rules_errors():
    _, diags = parse_logic_rules("service S { on e -> emit x(a = 1, a = 2); }")
    assert "DuplicateAssign" in codes(diags)
    _, diags = parse_logic_rules("service S { } service S { }")
    assert "DuplicateServiceRules" in codes(diags)
    _, diags = parse_logic_rules("service S { on e -> launch(); on f -> set x = 1; }")
    assert codes(diags) == ["Syntax"]


def test_crlf_input_is_accepted():
    spec, diags = parse_deployment('devices {\r\n  D { location: "a"; resources: X; protocol: mqtt; }\r\n}\r\n')
    assert diags == [] and spec.devices[0].span.line == 2
