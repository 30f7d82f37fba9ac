"""Build small device packages by hand for simulator tests."""

from iotforge.codegen.descriptors import DriverDescriptor, ServiceDescriptor, SinkDescriptor
from iotforge.linker import DevicePackage, Manifest
from iotforge.runtime import Reading, SensorTrace


def device(name, location, services=(), drivers=(), sinks=(), rules=(), order=0):
    return DevicePackage(name, Manifest(name, location, "Python", "mqtt", None, order),
                         tuple(services), tuple(drivers), tuple(sinks), tuple(rules))


def tag(name, events, record="Reading", fields=(("value", "double"),)):
    return DriverDescriptor(name, "tag", tuple((e, record) for e in events),
                            records={record: [list(f) for f in fields]})


def periodic(name, event, period_s, duration_s, record="Reading", fields=(("value", "double"),)):
    return DriverDescriptor(name, "periodic", ((event, record),), sample_period_s=period_s,
                            duration_s=duration_s, records={record: [list(f) for f in fields]})


def event_driven(name, event, condition, record="Reading", fields=(("value", "double"),)):
    return DriverDescriptor(name, "eventDriven", ((event, record),), condition=condition,
                            records={record: [list(f) for f in fields]})


def actuator(name, actions):
    return DriverDescriptor(name, "actuator", actions=tuple(
        (a, tuple(tuple(p) for p in params)) for a, params in actions))


def storage(name, event, record, fields, key=("id", "String")):
    return DriverDescriptor(name, "storage", ((event, record),), access_key=key,
                            records={record: [list(f) for f in fields]})


def custom(name, subscriptions=(), publications=(), requests=(), records=None, rules=True):
    return ServiceDescriptor(name, "Custom", tuple(subscriptions), tuple(publications),
                             tuple(requests), (), None,
                             f"rules/{name}.rules" if rules else None, records or {})


def common(name, consumed, produced, op, n, field, scope="Global", record="Reading",
           fields=(("value", "double"),)):
    return ServiceDescriptor(name, "Common", ((consumed, scope),), ((produced, record),),
                             compute=(op, n, field), records={record: [list(f) for f in fields]})


def sink(name, event, record, fields):
    return SinkDescriptor(name, event, record, records={record: [list(f) for f in fields]})


def trace(*readings):
    """``readings``: (sensor, t_ms, fields) or (sensor, t_ms, fields, event)."""
    out = SensorTrace()
    for sensor, t, fields, *event in sorted(readings, key=lambda r: r[1]):
        out.add(sensor, Reading(t, dict(fields), event[0] if event else None))
    return out
