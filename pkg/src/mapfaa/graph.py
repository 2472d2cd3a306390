"""Problem instances: graphs, per-agent edge durations and benchmark loaders.

Times are fixed-point integers. An instance carries ``time_scale``, the number
of integer units per time unit, so a duration of 2.5 with ``time_scale=10`` is
stored as 25. Grid benchmarks and the random duration model use integers and
``time_scale=1``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Iterable, Sequence

PASSABLE = frozenset(".G")
BLOCKED = frozenset("@OT")

MAX_TIME_SCALE = 10**6


class InstanceError(ValueError):
    """Raised for malformed maps, scenarios, instances or duration queries."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph with dense integer vertex ids and sorted adjacency."""

    adjacency: tuple[tuple[int, ...], ...]
    coords: tuple[tuple[int, int], ...] | None = None
    labels: tuple[str, ...] | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], coords=None, labels=None) -> Graph:
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise InstanceError(f"self-loop at vertex {u}")
            adj[u].add(v)
            adj[v].add(u)
        return cls(
            tuple(tuple(sorted(a)) for a in adj),
            None if coords is None else tuple(coords),
            None if labels is None else tuple(labels),
        )

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < len(self.adjacency) and v in self.adjacency[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, adj in enumerate(self.adjacency) for v in adj if u < v]


@dataclass(frozen=True)
class GridMap:
    """Grid metadata kept alongside the graph built from a map file."""

    height: int
    width: int
    passable: tuple[tuple[bool, ...], ...]
    vertex_of: dict[tuple[int, int], int] = field(compare=False, repr=False)

    def render(self) -> str:
        return "\n".join("".join("." if c else "@" for c in row) for row in self.passable)

    def vertex(self, row: int, col: int) -> int:
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise InstanceError(f"cell ({row}, {col}) is outside the {self.height}x{self.width} map")
        try:
            return self.vertex_of[(row, col)]
        except KeyError:
            raise InstanceError(f"cell ({row}, {col}) is blocked") from None


def grid_graph(passable: Sequence[Sequence[bool]]) -> tuple[Graph, GridMap]:
    height = len(passable)
    width = len(passable[0]) if height else 0
    vertex_of: dict[tuple[int, int], int] = {}
    coords = []
    # ids follow row-major order over passable cells only
    for r in range(height):
        for c in range(width):
            if passable[r][c]:
                vertex_of[(r, c)] = len(coords)
                coords.append((r, c))
    edges = []
    for (r, c), u in vertex_of.items():
        for rr, cc in ((r + 1, c), (r, c + 1)):
            v = vertex_of.get((rr, cc))
            if v is not None:
                edges.append((u, v))
    graph = Graph.from_edges(len(coords), edges, coords=coords)
    grid = GridMap(height, width, tuple(tuple(bool(x) for x in row) for row in passable), vertex_of)
    return graph, grid


def empty_grid(height: int, width: int) -> tuple[Graph, GridMap]:
    return grid_graph([[True] * width for _ in range(height)])


def load_map(text: str) -> tuple[Graph, GridMap]:
    """Parse a grid map in the movingai format into a 4-connected graph.

    Passable cells ('.', 'G') become vertices numbered row-major over the
    passable cells; '@', 'O' and 'T' are blocked.
    """
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) < 4:
        raise InstanceError("map header is incomplete")
    header: dict[str, str] = {}
    for ln in lines[:4]:
        parts = ln.split()
        if not parts:
            raise InstanceError("blank line in map header")
        header[parts[0]] = parts[1] if len(parts) > 1 else ""
    if set(header) != {"type", "height", "width", "map"}:
        raise InstanceError(f"malformed map header: {sorted(header)}")
    try:
        height, width = int(header["height"]), int(header["width"])
    except ValueError:
        raise InstanceError("map height/width must be integers") from None
    rows = lines[4:]
    if len(rows) != height:
        raise InstanceError(f"expected {height} map rows, found {len(rows)}")
    passable = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise InstanceError(f"row {r} has width {len(row)}, expected {width}")
        cells = []
        for ch in row:
            if ch in PASSABLE:
                cells.append(True)
            elif ch in BLOCKED:
                cells.append(False)
            else:
                raise InstanceError(f"unknown cell character {ch!r} in row {r}")
        passable.append(cells)
    return grid_graph(passable)


def dump_map(grid: GridMap) -> str:
    return f"type octile\nheight {grid.height}\nwidth {grid.width}\nmap\n{grid.render()}\n"


def load_scenario(text: str, n: int, grid: GridMap) -> list[tuple[int, int]]:
    """Return the first ``n`` (start, goal) vertex pairs of a version-1 scenario.

    Records are tab separated: bucket, map, width, height, start x, start y,
    goal x, goal y, optimal length. x is the column and y the row.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].lower().startswith("version"):
        raise InstanceError("scenario must start with a version line")
    records = lines[1:]
    if n < 0 or n > len(records):
        raise InstanceError(f"requested {n} agents but scenario has {len(records)} records")
    pairs = []
    for k, ln in enumerate(records[:n]):
        fields = ln.split("\t")
        if len(fields) < 8:
            fields = ln.split()
        if len(fields) < 8:
            raise InstanceError(f"scenario record {k} has {len(fields)} fields")
        try:
            sx, sy, gx, gy = (int(f) for f in fields[4:8])
        except ValueError:
            raise InstanceError(f"scenario record {k} has non-integer coordinates") from None
        pairs.append((grid.vertex(sy, sx), grid.vertex(gy, gx)))
    return pairs


class DurationTable:
    """Per-agent edge durations in fixed-point units.

    Each agent has an optional default duration and optional per-edge
    overrides keyed by directed edge. Symmetric overrides are stored in both
    directions.
    """

    def __init__(self, defaults: Sequence[int | None], overrides: Sequence[dict[tuple[int, int], int]] | None = None):
        self.defaults = tuple(defaults)
        self.overrides = tuple(dict(o) for o in overrides) if overrides is not None else tuple({} for _ in defaults)
        if len(self.overrides) != len(self.defaults):
            raise InstanceError("defaults and overrides disagree on the agent count")
        for d in self.defaults:
            if d is not None and (not isinstance(d, int) or d <= 0):
                raise InstanceError(f"durations must be positive integers in fixed-point units, got {d!r}")
        for o in self.overrides:
            for e, d in o.items():
                if not isinstance(d, int) or d <= 0:
                    raise InstanceError(f"duration for edge {e} must be a positive integer, got {d!r}")

    @classmethod
    def uniform(cls, per_agent: Sequence[int]) -> DurationTable:
        return cls(list(per_agent))

    @property
    def agent_count(self) -> int:
        return len(self.defaults)

    def is_uniform(self) -> bool:
        return not any(self.overrides) and all(d is not None for d in self.defaults)

    def lookup(self, agent: int, u: int, v: int) -> int:
        d = self.overrides[agent].get((u, v))
        if d is None:
            d = self.defaults[agent]
        if d is None:
            raise InstanceError(f"no duration for agent {agent} on edge ({u}, {v})")
        return d

    def subset(self, agents: Sequence[int]) -> DurationTable:
        return DurationTable([self.defaults[a] for a in agents], [self.overrides[a] for a in agents])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DurationTable):
            return NotImplemented
        return self.defaults == other.defaults and self.overrides == other.overrides

    def __repr__(self) -> str:
        return f"DurationTable(defaults={self.defaults!r}, overrides={self.overrides!r})"


def gen_uniform_durations(n: int, k: int, seed: int) -> DurationTable:
    """Draw one integer duration per agent uniformly from [1, k].

    Uses ``random.Random(seed).randint`` (Mersenne Twister), one draw per agent
    in agent order.
    """
    if k < 1:
        raise InstanceError("K must be at least 1")
    if n < 1:
        raise InstanceError("N must be at least 1")
    rng = random.Random(seed)
    return DurationTable.uniform([rng.randint(1, k) for _ in range(n)])


@dataclass(frozen=True, eq=False)
class Instance:
    graph: Graph
    durations: DurationTable
    starts: tuple[int, ...]
    goals: tuple[int, ...]
    time_scale: int = 1
    grid: GridMap | None = None
    name: str = ""

    def __post_init__(self):
        n = len(self.starts)
        if n < 1:
            raise InstanceError("an instance needs at least one agent")
        if len(self.goals) != n or self.durations.agent_count != n:
            raise InstanceError("starts, goals and durations disagree on the agent count")
        for v in (*self.starts, *self.goals):
            if not 0 <= v < self.graph.vertex_count:
                raise InstanceError(f"vertex {v} is not in the graph")
        if len(set(self.starts)) != n:
            raise InstanceError("starts must be distinct")
        if len(set(self.goals)) != n:
            raise InstanceError("goals must be distinct")
        for i in range(n):
            for u in range(self.graph.vertex_count):
                for v in self.graph.adjacency[u]:
                    self.durations.lookup(i, u, v)
        # hot-path tables: moves[i][v] = ((u, duration), ...) in adjacency order
        moves = tuple(
            tuple(tuple((u, self.durations.lookup(i, v, u)) for u in adj) for v, adj in enumerate(self.graph.adjacency))
            for i in range(n)
        )
        object.__setattr__(self, "moves", moves)

    @property
    def agent_count(self) -> int:
        return len(self.starts)

    def duration(self, agent: int, u: int, v: int) -> int:
        if not self.graph.has_edge(u, v):
            raise InstanceError(f"({u}, {v}) is not an edge")
        return self.durations.lookup(agent, u, v)

    def min_duration(self, agents: Iterable[int] | None = None) -> int:
        """Smallest duration over the given agents (all by default) and all edges."""
        idx = range(self.agent_count) if agents is None else agents
        best = None
        for i in idx:
            for row in self.moves[i]:
                for _, d in row:
                    if best is None or d < best:
                        best = d
        if best is None:
            # edgeless graph: nobody can move, waits still need a positive quantum
            best = 1
        return best

    def all_durations(self) -> set[int]:
        return {d for rows in self.moves for row in rows for _, d in row}

    def subset(self, agents: Sequence[int], starts: Sequence[int] | None = None) -> Instance:
        """Sub-instance over ``agents`` (re-indexed 0..k-1)."""
        return Instance(
            self.graph,
            self.durations.subset(agents),
            tuple(self.starts[a] for a in agents) if starts is None else tuple(starts),
            tuple(self.goals[a] for a in agents),
            self.time_scale,
            self.grid,
            self.name,
        )

    def with_durations(self, durations: DurationTable) -> Instance:
        return Instance(self.graph, durations, self.starts, self.goals, self.time_scale, self.grid, self.name)

    def to_time(self, units: int) -> float:
        return units / self.time_scale


def _scale_for(values: Iterable[Decimal]) -> int:
    scale = 1
    for val in values:
        while (val * scale) % 1 != 0:
            scale *= 10
            if scale > MAX_TIME_SCALE:
                raise InstanceError(f"duration {val} needs more than {MAX_TIME_SCALE} units per time unit")
    return scale


def _to_units(val: Decimal, scale: int) -> int:
    out = val * scale
    if out % 1 != 0:
        raise InstanceError(f"duration {val} is not representable with time_scale {scale}")
    return int(out)


def instance_from_dict(data: dict[str, Any]) -> Instance:
    """Build an instance from the JSON instance format.

    ``vertices`` is a count or a list of labels; edges and agents may refer to
    vertices by id or label. ``durations`` maps agent index to
    ``{"default": d, "edges": [[u, v, d], ...], "asymmetric": bool}``.
    """
    raw_v = data.get("vertices")
    if isinstance(raw_v, int):
        n_vertices, labels = raw_v, None
    elif isinstance(raw_v, list):
        n_vertices, labels = len(raw_v), [str(x) for x in raw_v]
    else:
        raise InstanceError("'vertices' must be a count or a list of labels")
    index = {lab: k for k, lab in enumerate(labels)} if labels else {}

    def vid(x) -> int:
        if isinstance(x, bool):
            raise InstanceError(f"bad vertex reference {x!r}")
        if isinstance(x, int):
            return x
        if isinstance(x, str) and x in index:
            return index[x]
        raise InstanceError(f"unknown vertex {x!r}")

    edges = [(vid(u), vid(v)) for u, v in data.get("edges", [])]
    graph = Graph.from_edges(n_vertices, edges, labels=labels)
    agents = data.get("agents")
    if not agents:
        raise InstanceError("'agents' must be a non-empty list")
    starts = tuple(vid(a["start"]) for a in agents)
    goals = tuple(vid(a["goal"]) for a in agents)

    specs = data.get("durations", {})
    per_agent = []
    for i in range(len(agents)):
        spec = specs.get(str(i), specs.get(i))
        if spec is None:
            raise InstanceError(f"no durations for agent {i}")
        if not isinstance(spec, dict):
            spec = {"default": spec}
        per_agent.append(spec)

    def dec(x) -> Decimal:
        return x if isinstance(x, Decimal) else Decimal(str(x))

    values = []
    for spec in per_agent:
        if spec.get("default") is not None:
            values.append(dec(spec["default"]))
        values.extend(dec(e[2]) for e in spec.get("edges", []))
    if any(v <= 0 for v in values):
        raise InstanceError("durations must be strictly positive")
    scale = int(data["time_scale"]) if "time_scale" in data else _scale_for(values)

    defaults: list[int | None] = []
    overrides = []
    for spec in per_agent:
        defaults.append(None if spec.get("default") is None else _to_units(dec(spec["default"]), scale))
        table = {}
        for u, v, d in spec.get("edges", []):
            u, v = vid(u), vid(v)
            if not graph.has_edge(u, v):
                raise InstanceError(f"duration given for non-edge ({u}, {v})")
            units = _to_units(dec(d), scale)
            table[(u, v)] = units
            if not spec.get("asymmetric", False):
                table[(v, u)] = units
        overrides.append(table)
    return Instance(graph, DurationTable(defaults, overrides), starts, goals, scale, name=data.get("name", ""))


def load_instance(text: str) -> Instance:
    return instance_from_dict(json.loads(text, parse_float=Decimal))


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    scale = inst.time_scale

    def num(units: int):
        return units if scale == 1 else units / scale

    durations = {}
    for i in range(inst.agent_count):
        spec: dict[str, Any] = {}
        if inst.durations.defaults[i] is not None:
            spec["default"] = num(inst.durations.defaults[i])
        if inst.durations.overrides[i]:
            spec["edges"] = [[u, v, num(d)] for (u, v), d in sorted(inst.durations.overrides[i].items())]
            spec["asymmetric"] = True
        durations[str(i)] = spec
    out: dict[str, Any] = {
        "vertices": list(inst.graph.labels) if inst.graph.labels else inst.graph.vertex_count,
        "edges": [list(e) for e in inst.graph.edges()],
        "durations": durations,
        "agents": [{"start": s, "goal": g} for s, g in zip(inst.starts, inst.goals)],
    }
    if scale != 1:
        out["time_scale"] = scale
    if inst.name:
        out["name"] = inst.name
    return out


def grid_instance(
    grid_pair: tuple[Graph, GridMap],
    pairs: Sequence[tuple[int, int]],
    durations: DurationTable,
    name: str = "",
) -> Instance:
    graph, grid = grid_pair
    return Instance(graph, durations, tuple(s for s, _ in pairs), tuple(g for _, g in pairs), 1, grid, name)


def random_pairs(graph: Graph, n: int, seed: int) -> list[tuple[int, int]]:
    """Distinct random starts and distinct random goals (seeded)."""
    if n > graph.vertex_count:
        raise InstanceError(f"cannot place {n} agents on {graph.vertex_count} vertices")
    rng = random.Random(seed)
    starts = rng.sample(range(graph.vertex_count), n)
    goals = rng.sample(range(graph.vertex_count), n)
    return list(zip(starts, goals))
