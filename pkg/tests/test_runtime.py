import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotforge.errors import (
    ArgTypeMismatch,
    ExprTypeError,
    MissingField,
    MissingTrace,
    PayloadMismatch,
    RuleRuntimeError,
    TraceFormatError,
    UnknownAction,
    UnknownActuator,
    UnknownEvent,
    UnknownTarget,
)
from iotforge.model import Scope
from iotforge.parsing.base import parse_expr
from iotforge.runtime import (
    Broker,
    CommandMsg,
    Message,
    Reading,
    RequestMsg,
    RunLog,
    StorageSeed,
    Subscription,
    VirtualClock,
    compute_common,
    eval_expr,
    load_seeds,
    load_traces,
    periodic_times,
    run_simulation,
    sample_at,
)
from iotforge.runtime.traces import parse_readings
from simkit import actuator, common, custom, device, event_driven, periodic, sink, storage, tag, trace


# -- clock --------------------------------------------------------------------

@settings(max_examples=200)
@given(st.lists(st.integers(0, 10_000), max_size=40))
def test_clock_runs_in_time_then_insertion_order(times):
    clock = VirtualClock()
    seen = []
    for i, t in enumerate(times):
        clock.schedule(t, lambda t=t, i=i: seen.append((clock.now, t, i)))
    clock.run()
    assert [(t, i) for _, t, i in seen] == sorted((t, i) for t, i in zip(times, range(len(times))))
    assert all(now == t for now, t, _ in seen)


def test_clock_rejects_the_past_and_stops_at_until():
    clock = VirtualClock()
    fired = []
    clock.schedule(10, lambda: fired.append(10))
    clock.schedule(20, lambda: fired.append(20))
    clock.run(until=15)
    assert fired == [10] and clock.now == 10 and len(clock) == 1
    with pytest.raises(ValueError):
        clock.schedule(5, lambda: None)
    clock.after(0, lambda: fired.append("now"))
    clock.run()
    assert fired == [10, "now", 20]


# -- expressions --------------------------------------------------------------

def ev(text, **env):
    expr, diags = parse_expr(text)
    assert not diags
    return eval_expr(expr, env)


@pytest.mark.parametrize("text, env, expected", [
    ("7 / 2", {}, 3),
    ("-7 / 2", {}, -3),
    ("7 / -2", {}, -3),
    ("7.0 / 2", {}, 3.5),
    ("1 + 2 * 3", {}, 7),
    ("1 + 0.5", {}, 1.5),
    ("v > 3", {"event": {"v": 4}}, True),
    ("state.n == 2 && event.s == \"x\"", {"state": {"n": 2}, "event": {"s": "x"}}, True),
    ("\"a\" + \"b\"", {}, "ab"),
    ("!(1 < 2) || 2 >= 2", {}, True),
])
def test_eval_examples(text, env, expected):
    value = ev(text, **env)
    assert value == expected and type(value) is type(expected)


def test_double_division_by_zero_follows_ieee():
    assert ev("1.0 / 0") == math.inf
    assert ev("-1.0 / 0") == -math.inf
    assert math.isnan(ev("0.0 / 0"))


def test_long_division_by_zero_raises():
    with pytest.raises(RuleRuntimeError):
        ev("1 / 0")


def test_missing_field_and_type_errors():
    with pytest.raises(MissingField):
        ev("event.gone > 1", event={})
    with pytest.raises(MissingField):
        ev("response.x", event={"x": 1})
    with pytest.raises(ExprTypeError):
        ev("\"a\" - 1")


def test_logical_operators_short_circuit():
    assert ev("false && event.gone", event={}) is False
    assert ev("true || event.gone", event={}) is True


@settings(max_examples=300)
@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6).filter(bool))
def test_long_division_truncates_toward_zero(a, b):
    assert ev(f"{a} / {b}") == int(Fraction(a, b))


# -- aggregation --------------------------------------------------------------

@pytest.mark.parametrize("op, values, expected", [
    ("AVG_BY_SAMPLE", [1.0, 2.0, 4.0], 7 / 3),
    ("AVG_BY_SAMPLE", [1, 2], 1.5),
    ("SUM_BY_SAMPLE", [1, 2, 3], 6),
    ("SUM_BY_SAMPLE", [0.1, 0.2, 0.3], 0.6),
    ("COUNT_BY_SAMPLE", [9.0, 9.0], 2),
])
def test_compute_common(op, values, expected):
    value = compute_common(op, len(values), "v", [{"v": v} for v in values])
    assert value == expected and type(value) is type(expected)


@pytest.mark.parametrize("period, duration, expected", [
    (1, 3, [1000, 2000, 3000]),
    (0.4, 1, [400, 800]),
    (2, 1, []),
    (0.001, 0.003, [1, 2, 3]),
])
def test_periodic_times(period, duration, expected):
    assert list(periodic_times(period, duration)) == expected


def test_sample_at_prefers_latest_then_earliest():
    readings = [Reading(500, {"v": 1}), Reading(1500, {"v": 2})]
    assert sample_at(readings, 100).fields == {"v": 1}
    assert sample_at(readings, 1500).fields == {"v": 2}
    assert sample_at(readings, 1499).fields == {"v": 1}


# -- broker -------------------------------------------------------------------

def make_broker(**kw):
    clock, log = VirtualClock(), RunLog()
    broker = Broker(clock, log, {"temp": "T", "badge": "B"},
                    {"T": [("v", "double")], "B": [("id", "String")], "P": [("pref", "double")]}, **kw)
    return clock, log, broker


def test_same_location_scope():
    clock, log, broker = make_broker()
    got = []
    broker.subscribe(Subscription("Kitchen", "temp", Scope.SAME_LOCATION, "home/kitchen"), got.append)
    broker.subscribe(Subscription("Monitor", "temp"), got.append)
    broker.publish(Message("temp", {"v": 1}, "S", "home/hall", 0))
    broker.publish(Message("temp", {"v": 2}, "S", "home/kitchen", 0))
    clock.run()
    assert [(e["subscriber"], e["ref"]) for e in log.of_kind("Deliver")] == \
        [("Monitor", 0), ("Kitchen", 1), ("Monitor", 1)]
    assert all(e["t"] == 1 for e in log.of_kind("Deliver"))
    assert got[0].payload == {"v": 1.0}


def test_same_location_needs_region():
    with pytest.raises(ValueError):
        Subscription("X", "temp", Scope.SAME_LOCATION)


def test_publish_without_subscribers_is_logged():
    clock, log, broker = make_broker()
    broker.publish(Message("temp", {"v": 1.5}, "S", "home", 0))
    clock.run()
    assert log.counts() == {"Publish": 1}


def test_subscribe_is_idempotent_and_does_not_replay():
    clock, log, broker = make_broker()
    broker.publish(Message("temp", {"v": 1.5}, "S", "home", 0))
    clock.run()
    sub = Subscription("M", "temp")
    broker.subscribe(sub, lambda m: None)
    broker.subscribe(sub, lambda m: None)
    assert broker.subscriptions == [sub]
    clock.run()
    assert log.of_kind("Deliver") == []
    with pytest.raises(UnknownEvent):
        broker.subscribe(Subscription("M", "humidity"), lambda m: None)


def test_publish_checks_payload():
    _, _, broker = make_broker()
    with pytest.raises(PayloadMismatch):
        broker.publish(Message("temp", {"v": "warm"}, "S", "home", 0))
    with pytest.raises(PayloadMismatch):
        broker.publish(Message("temp", {"v": 1.0, "extra": 1}, "S", "home", 0))
    with pytest.raises(UnknownEvent):
        broker.publish(Message("noise", {}, "S", "home", 0))


def test_commands_update_actuator_state():
    _, log, broker = make_broker(actuators={"Heater": {"SetTemp": [("setTemp", "double")], "Off": []}})
    assert broker.actuator_state["Heater"] == {"power": "off"}
    broker.command(CommandMsg("Heater", "SetTemp", (21,), "RC"))
    assert broker.actuator_state["Heater"] == {"power": "on", "setTemp": 21.0}
    broker.command(CommandMsg("Heater", "Off", (), "RC"))
    assert broker.actuator_state["Heater"]["power"] == "off"
    assert [e["args"] for e in log.of_kind("Command")] == [{"setTemp": 21.0}, {}]


@pytest.mark.parametrize("cmd, error", [
    (CommandMsg("Lamp", "On"), UnknownActuator),
    (CommandMsg("Heater", "Boost"), UnknownAction),
    (CommandMsg("Heater", "SetTemp", ("hot",)), ArgTypeMismatch),
    (CommandMsg("Heater", "SetTemp", ()), ArgTypeMismatch),
])
def test_command_errors(cmd, error):
    _, log, broker = make_broker(actuators={"Heater": {"SetTemp": [("setTemp", "double")]}})
    with pytest.raises(error):
        broker.command(cmd)
    assert log.entries == []


def test_request_response_and_not_found():
    clock, log, broker = make_broker(lookups={"DB": ("profile", "P", {"b1": {"pref": 20}})})
    answers = []
    broker.request(RequestMsg("DB", "b1", "Prox"), answers.append)
    broker.request(RequestMsg("DB", "zz", "Prox"), answers.append)
    clock.run()
    assert [(a.correlation_id, a.found, a.payload) for a in answers] == \
        [(1, True, {"pref": 20.0}), (2, False, None)]
    responses = log.of_kind("Response")
    assert [r["t"] for r in responses] == [5, 5] and [r["corr"] for r in responses] == [1, 2]
    with pytest.raises(UnknownTarget):
        broker.request(RequestMsg("Nowhere", 1, "Prox"), answers.append)


def test_run_log_round_trip():
    log = RunLog()
    log.append(0, "Publish", event="e", payload={"s": "é"})
    log.append(3, "Notify", payload={"n": 1})
    assert RunLog.from_jsonl(log.to_jsonl()).entries == log.entries
    assert [e["seq"] for e in log.entries] == [0, 1]


# -- traces -------------------------------------------------------------------

def test_trace_parsing_and_errors(tmp_path):
    rows = parse_readings(['{"sensor": "S", "t": 5, "fields": {"v": 1}}', "",
                           '{"sensor": "T", "t": 0, "fields": {}, "event": "e"}'])
    assert rows == [("S", Reading(5, {"v": 1})), ("T", Reading(0, {}, "e"))]
    for bad in ('{"sensor": "S", "t": -1, "fields": {}}', '{"sensor": "S", "t": true, "fields": {}}',
                '[1]', '{"sensor": "S"', '{"sensor": "S", "t": 1, "fields": {}, "event": 3}'):
        with pytest.raises(TraceFormatError):
            parse_readings([bad])
    with pytest.raises(TraceFormatError):
        trace(("S", 5, {}), ("S", 5, {})).add("S", Reading(1, {}))


def test_load_traces_and_seeds(tmp_path):
    (tmp_path / "a.jsonl").write_text('{"sensor": "S", "t": 1, "fields": {"v": 2}}\n')
    (tmp_path / "Weather.json").write_text('{"k": {"w": 1}}')
    loaded = load_traces(tmp_path)
    assert loaded.readings == {"S": [Reading(1, {"v": 2})]}
    assert loaded.tables == {"Weather": {"k": {"w": 1}}}
    assert load_seeds(tmp_path).tables == {"Weather": {"k": {"w": 1}}}
    assert load_traces(tmp_path / "none").readings == {}
    (tmp_path / "Bad.json").write_text("[1, 2]")
    with pytest.raises(TraceFormatError):
        load_seeds(tmp_path)


# -- simulation ---------------------------------------------------------------

def test_event_driven_sensor_fires_on_rising_edges():
    pkg = device("D", "home", drivers=[event_driven("Smoke", "smoke", "value > 10")],
                 services=[custom("Log", [("smoke", "Global")], rules=False)])
    readings = [("Smoke", t, {"value": v}) for t, v in
                [(0, 20.0), (10, 30.0), (20, 5.0), (30, 11.0), (40, 12.0), (50, 1.0), (60, 99.0)]]
    log = run_simulation([pkg], trace(*readings))
    assert [e["t"] for e in log.of_kind("Publish")] == [0, 30, 60]


def test_periodic_sensor_samples_the_trace():
    pkg = device("D", "home", drivers=[periodic("Temp", "temp", 1, 3)])
    log = run_simulation([pkg], trace(("Temp", 1500, {"value": 1.0}), ("Temp", 2500, {"value": 2.0})))
    assert [(e["t"], e["payload"]["value"]) for e in log.of_kind("Publish")] == \
        [(1000, 1.0), (2000, 1.0), (3000, 2.0)]


def test_sensors_need_traces():
    with pytest.raises(MissingTrace):
        run_simulation([device("D", "home", drivers=[periodic("Temp", "temp", 1, 3)])])


def test_tag_readings_pick_their_event():
    pkg = device("D", "home", drivers=[tag("Badge", ["in", "out"])])
    log = run_simulation([pkg], trace(("Badge", 5, {"value": 1.0}, "out"), ("Badge", 9, {"value": 2.0}, "in")))
    assert [(e["t"], e["event"]) for e in log.of_kind("Publish")] == [(5, "out"), (9, "in")]
    with pytest.raises(TraceFormatError):
        run_simulation([pkg], trace(("Badge", 5, {"value": 1.0})))


def test_common_service_uses_tumbling_windows():
    pkg = device("D", "home", drivers=[tag("Src", ["raw"])],
                 services=[common("Sum", "raw", "total", "SUM_BY_SAMPLE", 3, "value")])
    readings = [("Src", t, {"value": float(t)}) for t in range(1, 8)]
    log = run_simulation([pkg], trace(*readings))
    totals = [(e["t"], e["payload"]["value"]) for e in log.of_kind("Publish") if e["event"] == "total"]
    assert totals == [(4, 6.0), (7, 15.0)]


def rules_for(service, body):
    return (service, f"service {service} {{\n{body}\n}}\n")


def test_rules_emit_command_set_and_notify():
    heater = actuator("Heater", [("SetTemp", [("setTemp", "double")])])
    svc = custom("Ctl", [("raw", "Global")], [("alert", "Alert")],
                 records={"Alert": [["msg", "String"], ["level", "double"]]})
    rules = rules_for("Ctl", "  on raw when event.value > 2 -> set last = event.value, "
                             "command Heater.SetTemp(setTemp = event.value), "
                             "notify App(msg = \"hot\", level = state.last);")
    pkg = device("D", "home", drivers=[tag("Src", ["raw"]), heater], services=[svc],
                 sinks=[sink("App", "alert", "Alert", [("msg", "String"), ("level", "double")])],
                 rules=[rules])
    log = run_simulation([pkg], trace(("Src", 0, {"value": 1.0}), ("Src", 10, {"value": 3.0})))
    kinds = [e["kind"] for e in log.entries if e["kind"] not in ("Publish", "Deliver")]
    assert kinds == ["StateChange", "Command", "Notify"]
    assert log.of_kind("Notify")[0]["payload"] == {"msg": "hot", "level": 3.0}
    assert all(e["t"] == 11 for e in log.entries[-3:])


def test_rule_errors_are_logged_and_the_run_continues():
    svc = custom("Ctl", [("raw", "Global")])
    rules = rules_for("Ctl", "  on raw -> set ok = 1, set bad = 1 / 0, set never = 2;\n"
                             "  on raw -> set after = event.value;")
    pkg = device("D", "home", drivers=[tag("Src", ["raw"])], services=[svc], rules=[rules])
    log = run_simulation([pkg], trace(("Src", 0, {"value": 1.0}), ("Src", 5, {"value": 2.0})))
    errors = log.of_kind("RuleError")
    assert len(errors) == 2 and errors[0]["rule"] == 0 and "division" in errors[0]["error"]
    fields = [e["field"] for e in log.of_kind("StateChange")]
    assert fields == ["ok", "after", "ok", "after"]


def test_requests_answer_through_response_rules():
    db = storage("DB", "profile", "P", [("id", "String"), ("pref", "double")])
    svc = custom("Prox", [("raw", "Global")], requests=["DB"])
    rules = rules_for("Prox", "  on raw -> request DB(\"b1\");\n"
                              "  on response profile -> set pref = response.pref;")
    pkg = device("D", "home", drivers=[tag("Src", ["raw"]), db], services=[svc], rules=[rules])
    seeds = StorageSeed({"DB": {"b1": {"id": "b1", "pref": 19}}})
    log = run_simulation([pkg], trace(("Src", 0, {"value": 1.0})), seeds)
    corr = {e["corr"] for e in log.of_kind("Request")} | {e["corr"] for e in log.of_kind("Response")}
    assert corr == {1}
    assert [(e["t"], e["value"]) for e in log.of_kind("StateChange")] == [(6, 19.0)]


def test_until_stops_the_run():
    pkg = device("D", "home", drivers=[periodic("Temp", "temp", 1, 10)])
    log = run_simulation([pkg], trace(("Temp", 0, {"value": 1.0})), until=4500)
    assert [e["t"] for e in log.of_kind("Publish")] == [1000, 2000, 3000, 4000]
