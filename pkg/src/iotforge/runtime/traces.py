"""Sensor traces and storage seeds.

Layout under a project root:

    traces/*.jsonl        one reading per line: {"sensor", "t" (ms), "fields"}
                          tags add "event" naming which of their events fired
    traces/<Sensor>.json  key -> payload table for a request-based sensor
    seeds/<Storage>.json  key -> payload table for a storage
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import TraceFormatError


@dataclass(frozen=True)
class Reading:
    t: int
    fields: dict
    event: Optional[str] = None


@dataclass
class SensorTrace:
    readings: dict = field(default_factory=dict)  # sensor -> [Reading], time-ordered
    tables: dict = field(default_factory=dict)  # request-based sensor -> {key: payload}

    def add(self, sensor: str, reading: Reading):
        series = self.readings.setdefault(sensor, [])
        if series and reading.t < series[-1].t:
            raise TraceFormatError(f"{sensor}: timestamp {reading.t} ms goes backwards")
        series.append(reading)


@dataclass
class StorageSeed:
    tables: dict = field(default_factory=dict)  # storage -> {key: payload}


def _table(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"{path}: {exc}") from None
    if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
        raise TraceFormatError(f"{path}: expected an object mapping keys to payload objects")
    return data


def parse_readings(lines, source: str = "<trace>") -> list[tuple[str, Reading]]:
    out = []
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        where = f"{source}:{number}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{where}: {exc}") from None
        if not isinstance(obj, dict):
            raise TraceFormatError(f"{where}: expected an object")
        sensor, t, fields = obj.get("sensor"), obj.get("t"), obj.get("fields")
        if not isinstance(sensor, str) or isinstance(t, bool) or not isinstance(t, int) or t < 0 \
                or not isinstance(fields, dict):
            raise TraceFormatError(f"{where}: need \"sensor\" (string), \"t\" (ms >= 0) and "
                                   f"\"fields\" (object)")
        event = obj.get("event")
        if event is not None and not isinstance(event, str):
            raise TraceFormatError(f"{where}: \"event\" must be a string")
        out.append((sensor, Reading(t, fields, event)))
    return out


def load_traces(directory) -> SensorTrace:
    """Readings from ``*.jsonl`` (sorted by file name) and tables from ``*.json``."""
    trace = SensorTrace()
    root = Path(directory)
    if not root.is_dir():
        return trace
    for path in sorted(root.glob("*.jsonl")):
        with path.open(encoding="utf-8") as fh:
            for sensor, reading in parse_readings(fh, str(path)):
                trace.add(sensor, reading)
    for path in sorted(root.glob("*.json")):
        trace.tables[path.stem] = _table(path)
    return trace


def load_seeds(directory) -> StorageSeed:
    root = Path(directory)
    if not root.is_dir():
        return StorageSeed()
    return StorageSeed({p.stem: _table(p) for p in sorted(root.glob("*.json"))})
