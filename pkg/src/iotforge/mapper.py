"""Assign computational services and interactors to devices.

Pins (a service or interactor listed in a device's ``resources``) are kept
as given. Unpinned services go through a pluggable, seeded strategy. The
default ``random`` strategy draws from SplitMix64 (see docs/rng.md) so
plans are reproducible in any language.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import (
    ConflictingPin,
    DuplicateStrategy,
    NoEligibleDevice,
    StrategyError,
    UnknownStrategy,
    UnpinnedInteractor,
)
from .validate import Project

MASK64 = (1 << 64) - 1


class SplitMix64:
    """64-bit SplitMix generator; the state advances by the golden-ratio increment."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, m: int) -> int:
        """Index in ``range(m)`` by multiply-high: ``(next * m) >> 64``."""
        return (self.next() * m) >> 64


Strategy = Callable[[list, list, int], Mapping[str, str]]


def random_strategy(services: list[str], devices: list[str], seed: int) -> dict[str, str]:
    rng = SplitMix64(seed)
    return {s: devices[rng.below(len(devices))] for s in services}


_STRATEGIES: dict[str, Strategy] = {"random": random_strategy}


def register_strategy(strategy_id: str, fn: Strategy):
    if strategy_id in _STRATEGIES:
        raise DuplicateStrategy(strategy_id)
    _STRATEGIES[strategy_id] = fn


def strategies() -> list[str]:
    return list(_STRATEGIES)


@dataclass(frozen=True)
class MapperConfig:
    seed: int = 0
    strategy: str = "random"

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class MappingPlan:
    assignments: dict = field(default_factory=dict)
    strategy: str = "random"
    seed: int = 0

    def to_json(self) -> bytes:
        body = {"assignments": dict(sorted(self.assignments.items())),
                "seed": self.seed, "strategy": self.strategy}
        return (json.dumps(body, sort_keys=True, indent=2) + "\n").encode("utf-8")

    @classmethod
    def from_json(cls, data) -> "MappingPlan":
        body = json.loads(data)
        return cls(dict(body["assignments"]), body["strategy"], body["seed"])

    def hosted_on(self, device: str) -> list[str]:
        return sorted(n for n, d in self.assignments.items() if d == device)


def map_services(project: Project, cfg: MapperConfig = MapperConfig()) -> MappingPlan:
    try:
        strategy = _STRATEGIES[cfg.strategy]
    except KeyError:
        raise UnknownStrategy(cfg.strategy) from None

    placements = project.placements()
    assignments: dict[str, str] = {}
    mappable = [s.name for s in project.arch.services] + [i.name for i in project.interactors]
    for name in mappable:
        hosts = list(dict.fromkeys(placements.get(name, ())))
        if len(hosts) > 1:
            raise ConflictingPin(f"{name} is pinned to {', '.join(hosts)}")
        if hosts:
            assignments[name] = hosts[0]
    for i in project.interactors:
        if i.name not in assignments:
            raise UnpinnedInteractor(i.name)

    unpinned = [s.name for s in project.arch.services if s.name not in assignments]
    eligible = [d.name for d in project.deploy.devices if d.platform]
    if unpinned and not eligible:
        raise NoEligibleDevice(unpinned[0])
    if unpinned:
        chosen = dict(strategy(list(unpinned), list(eligible), cfg.seed))
        if set(chosen) != set(unpinned) or not set(chosen.values()) <= set(eligible):
            raise StrategyError(f"strategy {cfg.strategy!r} returned an invalid assignment")
        assignments.update((s, chosen[s]) for s in unpinned)
    return MappingPlan(assignments, cfg.strategy, cfg.seed)
