"""In-process broker for publish/subscribe, commands and request/response."""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import ArgTypeMismatch, PayloadMismatch, UnknownAction, UnknownActuator, UnknownEvent, UnknownTarget
from ..model import Scope
from .clock import VirtualClock
from .evaluate import coerce, conforms

DELIVERY_LATENCY_MS = 1
RESPONSE_LATENCY_MS = 5


@dataclass(frozen=True)
class Message:
    event: str
    payload: dict
    publisher: str
    location: str
    timestamp: int


@dataclass(frozen=True)
class Subscription:
    subscriber: str
    event: str
    scope: Scope = Scope.GLOBAL
    region: Optional[str] = None

    def __post_init__(self):
        if self.scope is Scope.SAME_LOCATION and not self.region:
            raise ValueError(f"{self.subscriber}: a same-location subscription needs a region")

    def matches(self, msg: Message) -> bool:
        return self.event == msg.event and (
            self.scope is Scope.GLOBAL or self.region == msg.location)


@dataclass(frozen=True)
class CommandMsg:
    actuator: str
    action: str
    args: tuple = ()  # values in parameter order
    sender: str = ""
    timestamp: int = 0


@dataclass(frozen=True)
class RequestMsg:
    target: str
    key: object
    requester: str
    correlation_id: int = 0


@dataclass(frozen=True)
class ResponseMsg:
    correlation_id: int
    target: str
    requester: str
    payload: Optional[dict]  # None means NotFound

    @property
    def found(self) -> bool:
        return self.payload is not None


class RunLog:
    """Append-only record of a run; serializes to JSON Lines."""

    def __init__(self):
        self.entries: list[dict] = []

    def append(self, t: int, kind: str, **fields) -> int:
        seq = len(self.entries)
        self.entries.append({"t": t, "seq": seq, "kind": kind, **fields})
        return seq

    def of_kind(self, kind: str) -> list[dict]:
        return [e for e in self.entries if e["kind"] == kind]

    def counts(self) -> Counter:
        return Counter(e["kind"] for e in self.entries)

    def to_jsonl(self) -> bytes:
        return "".join(json.dumps(e, ensure_ascii=False) + "\n" for e in self.entries).encode("utf-8")

    def write(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, data) -> "RunLog":
        log = cls()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        log.entries = [json.loads(line) for line in text.splitlines() if line.strip()]
        return log


def conform_payload(payload: dict, fields: list, what: str) -> dict:
    """Check ``payload`` has exactly the record's fields and widen longs."""
    names = [f for f, _ in fields]
    if set(payload) != set(names):
        raise PayloadMismatch(f"{what}: fields {sorted(payload)} do not match {names}")
    out = {}
    for name, declared in fields:
        value = payload[name]
        if not conforms(value, declared):
            raise PayloadMismatch(f"{what}: field {name!r} expects {declared}, got {value!r}")
        out[name] = coerce(value, declared)
    return out


class Broker:
    """Routes messages in virtual time and logs every interaction.

    Handlers never run re-entrantly: deliveries and responses are queued on
    the clock, so a handler that publishes only enqueues further work.
    """

    def __init__(self, clock: VirtualClock, log: RunLog, event_types: dict, records: dict,
                 actuators: Optional[dict] = None, lookups: Optional[dict] = None):
        self.clock = clock
        self.log = log
        self.event_types = event_types  # event -> record name
        self.records = records  # record name -> [(field, type)]
        self.actuators = actuators or {}  # actuator -> {action: [(param, type)]}
        self.lookups = lookups or {}  # target -> (response event, record name, table)
        self.actuator_state: dict[str, dict] = {a: {"power": "off"} for a in self.actuators}
        self._subs: list[tuple[Subscription, Callable]] = []
        self._correlation = itertools.count(1)

    def record_fields(self, event: str) -> list:
        if event not in self.event_types:
            raise UnknownEvent(event)
        return self.records[self.event_types[event]]

    def subscribe(self, sub: Subscription, handler: Callable[[Message], None]):
        """Register a subscription; an identical one is ignored. No replay."""
        if sub.event not in self.event_types:
            raise UnknownEvent(sub.event)
        if any(existing == sub for existing, _ in self._subs):
            return
        self._subs.append((sub, handler))

    @property
    def subscriptions(self) -> list[Subscription]:
        return [s for s, _ in self._subs]

    def publish(self, msg: Message) -> int:
        payload = conform_payload(msg.payload, self.record_fields(msg.event), msg.event)
        ref = self.log.append(self.clock.now, "Publish", event=msg.event, publisher=msg.publisher,
                              location=msg.location, payload=payload)
        msg = Message(msg.event, payload, msg.publisher, msg.location, msg.timestamp)
        for sub, handler in self._subs:
            if sub.matches(msg):
                self.clock.after(DELIVERY_LATENCY_MS, self._deliverer(sub, handler, msg, ref))
        return ref

    def _deliverer(self, sub, handler, msg, ref):
        def deliver():
            self.log.append(self.clock.now, "Deliver", event=msg.event, subscriber=sub.subscriber,
                            publisher=msg.publisher, ref=ref)
            handler(msg)
        return deliver

    def command(self, cmd: CommandMsg):
        if cmd.actuator not in self.actuators:
            raise UnknownActuator(cmd.actuator)
        params = self.actuators[cmd.actuator].get(cmd.action)
        if params is None:
            raise UnknownAction(f"{cmd.actuator}.{cmd.action}")
        if len(params) != len(cmd.args):
            raise ArgTypeMismatch(f"{cmd.actuator}.{cmd.action} takes {len(params)} argument(s), "
                                  f"got {len(cmd.args)}")
        args = {}
        for (name, declared), value in zip(params, cmd.args):
            if not conforms(value, declared):
                raise ArgTypeMismatch(f"{cmd.actuator}.{cmd.action}: {name} expects {declared}, "
                                      f"got {value!r}")
            args[name] = coerce(value, declared)
        self.log.append(self.clock.now, "Command", sender=cmd.sender, actuator=cmd.actuator,
                        action=cmd.action, args=args)
        state = self.actuator_state[cmd.actuator]
        if cmd.action == "Off":
            state["power"] = "off"
        else:
            state["power"] = "on"
            state.update(args)

    def request(self, req: RequestMsg, on_response: Callable[[ResponseMsg], None]) -> int:
        """Log the request now; the response arrives after the response latency."""
        if req.target not in self.lookups:
            raise UnknownTarget(req.target)
        corr = next(self._correlation)
        self.log.append(self.clock.now, "Request", requester=req.requester, target=req.target,
                        key=req.key, corr=corr)
        event, record, table = self.lookups[req.target]
        raw = table.get(str(req.key))

        def respond():
            payload = None if raw is None else conform_payload(raw, self.records[record], req.target)
            self.log.append(self.clock.now, "Response", requester=req.requester, target=req.target,
                            corr=corr, found=payload is not None, payload=payload)
            on_response(ResponseMsg(corr, req.target, req.requester, payload))

        self.clock.after(RESPONSE_LATENCY_MS, respond)
        return corr
