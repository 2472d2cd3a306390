"""Timed paths, solutions and search statistics, with their JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

SOLVED = "solved"
FAILURE = "failure"
TIMEOUT = "timeout"
LIMIT = "limit"
HORIZON = "horizon"


@dataclass(frozen=True)
class Waypoint:
    v: int
    arrive: int
    depart: int


@dataclass
class TimedPath:
    agent: int
    waypoints: list[Waypoint]

    @property
    def arrival(self) -> int:
        """Arrival time at the final waypoint."""
        return self.waypoints[-1].arrive

    def vertices(self) -> list[int]:
        return [w.v for w in self.waypoints]


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 0
    pruned: int = 0
    runtime_s: float = 0.0
    outcome: str = FAILURE
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass
class Solution:
    algorithm: str
    cost: int | None
    paths: list[TimedPath]
    stats: SearchStats
    time_scale: int = 1

    @property
    def solved(self) -> bool:
        return self.stats.outcome == SOLVED

    def to_dict(self) -> dict[str, Any]:
        stats = asdict(self.stats)
        stats["runtime_s"] = round(stats["runtime_s"], 6)
        extra = stats.pop("extra")
        stats.update(extra)
        return {
            "algorithm": self.algorithm,
            "time_scale": self.time_scale,
            "cost": self.cost,
            "stats": stats,
            "paths": [
                {"agent": p.agent, "waypoints": [{"v": w.v, "arrive": w.arrive, "depart": w.depart} for w in p.waypoints]}
                for p in self.paths
            ],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Solution:
        raw = dict(data.get("stats", {}))
        known = {k: raw.pop(k) for k in ("expanded", "generated", "pruned", "runtime_s", "outcome") if k in raw}
        stats = SearchStats(**known, extra=raw)
        paths = [
            TimedPath(p["agent"], [Waypoint(w["v"], w["arrive"], w["depart"]) for w in p["waypoints"]])
            for p in data.get("paths", [])
        ]
        return cls(data.get("algorithm", ""), data.get("cost"), paths, stats, data.get("time_scale", 1))

    @classmethod
    def from_json(cls, text: str) -> Solution:
        return cls.from_dict(json.loads(text))
