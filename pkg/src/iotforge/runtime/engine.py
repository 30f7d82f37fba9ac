"""Discrete-event execution of linked device packages."""

from __future__ import annotations

import math
from typing import Optional

from ..codegen.descriptors import record_from_json
from ..errors import (
    ArgTypeMismatch,
    IoTForgeError,
    MissingTrace,
    PayloadMismatch,
    RuleRuntimeError,
    TraceFormatError,
    UnknownTarget,
)
from ..model import Command, Emit, Notify, Request, Scope, SetState
from ..parsing import parse_expr, parse_logic_rules
from ..validate import common_result_field
from .broker import Broker, CommandMsg, Message, RequestMsg, RunLog, Subscription, conform_payload
from .clock import VirtualClock
from .evaluate import coerce, eval_expr, eval_guard, value_type
from .traces import SensorTrace, StorageSeed

_DEFAULTS = {"long": 0, "double": 0.0, "String": "", "bool": False}


def compute_common(op: str, n: int, field: str, buffer) -> object:
    """Aggregate one full window. ``buffer`` holds payload records."""
    values = [r[field] for r in buffer]
    if op == "AVG_BY_SAMPLE":
        return math.fsum(values) / n
    if op == "SUM_BY_SAMPLE":
        if all(value_type(v) == "long" for v in values):
            return sum(values)
        return math.fsum(values)
    if op == "COUNT_BY_SAMPLE":
        return n
    raise ValueError(f"unknown operator {op}")


def period_ms(seconds: float) -> int:
    return round(seconds * 1000)


def periodic_times(period_s: float, duration_s: float) -> range:
    """Publish instants d, 2d, ..., floor(k/d)*d in milliseconds."""
    d, k = period_ms(period_s), period_ms(duration_s)
    if d <= 0:
        raise TraceFormatError(f"sample period must be at least 1 ms, got {period_s} s")
    return range(d, (k // d) * d + 1, d)


def sample_at(readings, t: int):
    """Latest reading at or before ``t``; the earliest one if none precede it."""
    chosen = readings[0]
    for r in readings:
        if r.t > t:
            break
        chosen = r
    return chosen


class _Service:
    def __init__(self, sim: "Simulation", desc, location: str, rules_text: Optional[str]):
        self.sim = sim
        self.desc = desc
        self.name = desc.service
        self.location = location
        self.buffer: list[dict] = []
        self.state: dict = {}
        self.rules = ()
        if rules_text:
            ruleset, diags = parse_logic_rules(rules_text, f"rules/{self.name}.rules")
            block = ruleset.for_service(self.name) if ruleset else None
            if block is None:
                raise IoTForgeError(f"rules for {self.name} did not parse: "
                                    f"{'; '.join(d.render() for d in diags)}")
            self.rules = block.rules

    def on_message(self, msg: Message):
        if self.desc.compute is not None:
            self._aggregate(msg)
        else:
            self._fire("event", msg.event, {"event": msg.payload})

    def on_response(self, resp):
        if resp.found:
            event = self.sim.broker.lookups[resp.target][0]
            self._fire("response", event, {"response": resp.payload})

    def _aggregate(self, msg: Message):
        op, n, field = self.desc.compute
        self.buffer.append(msg.payload)
        if len(self.buffer) < n:
            return
        value = compute_common(op, n, field, self.buffer)
        last = self.buffer[-1]
        self.buffer = []
        for event, record in self.desc.publications:
            fields = self.sim.records[record]
            target = common_result_field(record_from_json(record, fields), field)
            payload = {}
            for name, declared in fields:
                if name == target:
                    payload[name] = coerce(value, declared)
                elif name in last and value_type(last[name]) == declared:
                    payload[name] = last[name]
                else:
                    payload[name] = _DEFAULTS[declared]
            self.sim.publish(event, payload, self.name, self.location)

    def _fire(self, kind: str, name: str, env: dict):
        for index, rule in enumerate(self.rules):
            if rule.trigger.kind != kind or rule.trigger.name != name:
                continue
            scope = {**env, "state": self.state}
            try:
                if rule.guard is not None and not eval_guard(rule.guard, scope):
                    continue
                for action in rule.actions:
                    self._act(action, scope)
            except (RuleRuntimeError, ArgTypeMismatch, PayloadMismatch, UnknownTarget) as exc:
                self.sim.log.append(self.sim.clock.now, "RuleError", service=self.name,
                                    rule=index, error=f"{type(exc).__name__}: {exc}")

    def _assigns(self, assigns, scope) -> dict:
        return {a.name: eval_expr(a.expr, scope) for a in assigns}

    def _act(self, action, scope):
        sim = self.sim
        if isinstance(action, Emit):
            sim.publish(action.event, self._assigns(action.assigns, scope), self.name, self.location)
        elif isinstance(action, Command):
            values = self._assigns(action.assigns, scope)
            params = sim.broker.actuators.get(action.actuator, {}).get(action.action, [])
            extra = set(values) - {p for p, _ in params}
            if extra:
                raise ArgTypeMismatch(f"{action.actuator}.{action.action}: unknown parameter(s) "
                                      f"{sorted(extra)}")
            args = tuple(values[p] for p, _ in params if p in values)
            sim.broker.command(CommandMsg(action.actuator, action.action, args, self.name,
                                          sim.clock.now))
        elif isinstance(action, Request):
            key = eval_expr(action.key, scope)
            sim.broker.request(RequestMsg(action.target, key, self.name), self.on_response)
        elif isinstance(action, Notify):
            sim.notify(action.interactor, self._assigns(action.assigns, scope), self.name)
        elif isinstance(action, SetState):
            value = eval_expr(action.expr, scope)
            self.state[action.field] = value
            sim.log.append(sim.clock.now, "StateChange", service=self.name, field=action.field,
                           value=value)


class Simulation:
    """Wires packages onto one broker and runs them against traces and seeds."""

    def __init__(self, packages, traces: Optional[SensorTrace] = None,
                 seeds: Optional[StorageSeed] = None):
        traces = traces or SensorTrace()
        seeds = seeds or StorageSeed()
        self.clock = VirtualClock()
        self.log = RunLog()
        self.records: dict[str, list] = {}
        event_types: dict[str, str] = {}
        actuators: dict[str, dict] = {}
        lookups: dict[str, tuple] = {}
        self.sinks: dict[str, object] = {}

        for pkg in packages:
            for desc in (*pkg.services, *pkg.drivers, *pkg.sinks):
                for name, fields in desc.records.items():
                    self.records.setdefault(name, [tuple(f) for f in fields])
            for d in pkg.drivers:
                for event, record in d.generates:
                    event_types.setdefault(event, record)
                if d.kind == "actuator":
                    actuators[d.name] = {a: list(params) for a, params in d.actions}
                elif d.kind in ("storage", "requestBased"):
                    source = seeds.tables if d.kind == "storage" else traces.tables
                    event, record = d.generates[0]
                    lookups[d.name] = (event, record, source.get(d.name, {}))
            for s in pkg.services:
                for event, record in s.publications:
                    event_types.setdefault(event, record)
            for sink in pkg.sinks:
                self.sinks[sink.interactor] = sink
        self.broker = Broker(self.clock, self.log, event_types, self.records, actuators, lookups)

        self.services: dict[str, _Service] = {}
        for pkg in packages:
            rules = dict(pkg.rules)
            for desc in pkg.services:
                svc = _Service(self, desc, pkg.manifest.location, rules.get(desc.service))
                self.services[svc.name] = svc
                for event, scope in desc.subscriptions:
                    scope = Scope(scope)
                    region = pkg.manifest.location if scope is Scope.SAME_LOCATION else None
                    self.broker.subscribe(Subscription(svc.name, event, scope, region), svc.on_message)
        for pkg in packages:
            for d in pkg.drivers:
                self._schedule_driver(d, pkg.manifest.location, traces)

    def publish(self, event: str, payload: dict, publisher: str, location: str):
        self.broker.publish(Message(event, payload, publisher, location, self.clock.now))

    def notify(self, interactor: str, payload: dict, sender: str):
        sink = self.sinks.get(interactor)
        if sink is None:
            raise UnknownTarget(interactor)
        payload = conform_payload(payload, self.records[sink.type], interactor)
        self.log.append(self.clock.now, "Notify", sender=sender, interactor=interactor,
                        event=sink.event, payload=payload)

    def _schedule_driver(self, d, location: str, traces: SensorTrace):
        readings = traces.readings.get(d.name)
        if d.kind in ("periodic", "eventDriven") and not readings:
            raise MissingTrace(d.name)
        if d.kind == "periodic":
            event = d.generates[0][0]
            times = iter(periodic_times(d.sample_period_s, d.duration_s))
            self._chain(times, lambda t: self.publish(event, dict(sample_at(readings, t).fields),
                                                      d.name, location))
        elif d.kind == "eventDriven":
            event = d.generates[0][0]
            condition, diags = parse_expr(d.condition, f"{d.name}.onCondition")
            if condition is None:
                raise TraceFormatError(f"{d.name}: bad condition {d.condition!r}")
            previous = {"holds": False}

            def check(reading):
                try:
                    holds = eval_guard(condition, {"event": reading.fields})
                except RuleRuntimeError as exc:
                    raise TraceFormatError(f"{d.name} at {reading.t} ms: {exc}") from None
                if holds and not previous["holds"]:
                    self.publish(event, dict(reading.fields), d.name, location)
                previous["holds"] = holds

            for r in readings:
                self.clock.schedule(r.t, lambda r=r: check(r))
        elif d.kind == "tag" and readings:
            events = [e for e, _ in d.generates]
            for r in readings:
                event = r.event or (events[0] if len(events) == 1 else None)
                if event not in events:
                    raise TraceFormatError(f"{d.name}: reading at {r.t} ms names no event of this tag")
                self.clock.schedule(r.t, lambda r=r, event=event: self.publish(
                    event, dict(r.fields), d.name, location))

    def _chain(self, times, fire):
        """Schedule ``fire`` at each instant, one queued event at a time."""
        def step(t):
            def run():
                fire(t)
                nxt = next(times, None)
                if nxt is not None:
                    self.clock.schedule(nxt, step(nxt))
            return run

        first = next(times, None)
        if first is not None:
            self.clock.schedule(first, step(first))

    def run(self, until: Optional[int] = None) -> RunLog:
        self.clock.run(until)
        return self.log


def run_simulation(packages, traces: Optional[SensorTrace] = None,
                   seeds: Optional[StorageSeed] = None, until: Optional[int] = None) -> RunLog:
    return Simulation(packages, traces, seeds).run(until)
