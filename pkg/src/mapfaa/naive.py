"""Naive time-discretized A*: the joint search advances one common tick at a time.

Every agent is idle at a vertex, part-way along an edge (edge plus remaining
ticks), or finished (parked at its goal for good, costing nothing more). The
tick itself is part of the state, so the search space is the time-augmented
graph bounded by a horizon.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from functools import reduce

from .graph import DurationTable, Instance
from .lss import CHECK_EVERY, INF, SearchParams, heuristic_table
from .solution import FAILURE, HORIZON, LIMIT, SOLVED, TIMEOUT, SearchStats, Solution, TimedPath, Waypoint


class TickError(ValueError):
    pass


def common_unit(durations: DurationTable | Instance | list[int]) -> int:
    """Greatest common divisor of every duration in use."""
    if isinstance(durations, Instance):
        values = durations.all_durations()
    elif isinstance(durations, DurationTable):
        values = {d for d in durations.defaults if d is not None}
        for table in durations.overrides:
            values.update(table.values())
    else:
        values = durations
    values = [int(d) for d in values]
    if not values or any(d <= 0 for d in values):
        raise TickError("durations must be positive integers")
    return reduce(math.gcd, values)


@dataclass(frozen=True)
class TickModel:
    tau: int
    horizon: int
    ticks: tuple[dict, ...]

    @classmethod
    def build(cls, instance: Instance, tau: int | None = None, horizon: int | None = None) -> TickModel:
        tau = common_unit(instance) if tau is None else tau
        if tau <= 0 or any(d % tau for d in instance.all_durations()):
            raise TickError(f"tick {tau} does not divide every duration")
        adj = instance.graph.adjacency
        ticks = tuple(
            {(u, v): instance.duration(i, u, v) // tau for u in range(len(adj)) for v in adj[u]}
            for i in range(instance.agent_count)
        )
        if horizon is None:
            horizon = default_horizon(instance, tau)
        if horizon < 1:
            raise TickError("horizon must be at least one tick")
        return cls(tau, horizon, ticks)


def default_horizon(instance: Instance, tau: int) -> int:
    ctg = heuristic_table(instance)
    total = sum(ctg[i][s] for i, s in enumerate(instance.starts))
    if total == INF:
        total = sum(instance.all_durations()) * instance.graph.vertex_count
    return int(4 * total // tau + 16)


def _options(model: TickModel, adj, goal: int, i: int, cfg, finished: bool):
    """(next config, instant occupancy during the tick, tick cost, finished after)."""
    frm, to, left = cfg
    if finished:
        yield cfg, (to,), 0, True
        return
    if left:
        nxt = (frm, to, left - 1) if left > 1 else (to, to, 0)
        yield nxt, (frm, to), 1, False
        return
    if to == goal:
        yield cfg, (to,), 0, True
    yield cfg, (to,), 1, False
    for u in adj[to]:
        k = model.ticks[i][(to, u)]
        yield ((to, u, k - 1) if k > 1 else (u, u, 0)), (to, u), 1, False


def _joint_moves(model, adj, goals, cfgs, done):
    n = len(cfgs)
    chosen = [None] * n
    occ: list[tuple] = [()] * n

    def rec(i, cost, newdone):
        if i == n:
            seen = set()
            for frm, to, left in chosen:
                for x in ((to,) if left == 0 else (frm, to)):
                    if x in seen:
                        return
                    seen.add(x)
            yield tuple(chosen), cost, newdone
            return
        for nxt, o, c, fin in _options(model, adj, goals[i], i, cfgs[i], bool(done >> i & 1)):
            if any(x in occ[j] for j in range(i) for x in o):
                continue
            chosen[i] = nxt
            occ[i] = o
            yield from rec(i + 1, cost + c, newdone | (1 << i) if fin else newdone)

    yield from rec(0, 0, done)


def _paths(trace: list[tuple], tau: int) -> list[TimedPath]:
    n = len(trace[0])
    paths = []
    for i in range(n):
        start = trace[0][i][1]
        points = [[start, 0, 0]]
        prev = trace[0][i]
        for k in range(1, len(trace)):
            cur = trace[k][i]
            if prev[2] == 0 and cur != prev:
                points[-1][2] = (k - 1) * tau
            if cur[2] == 0 and (cur[1] != prev[1] or prev[2] != 0):
                points.append([cur[1], k * tau, k * tau])
            prev = cur
        points[-1][2] = points[-1][1]
        paths.append(TimedPath(i, [Waypoint(v, a, d) for v, a, d in points]))
    return paths


def naive_search(
    instance: Instance,
    tau: int | None = None,
    horizon: int | None = None,
    params: SearchParams | None = None,
) -> Solution:
    """A* over (tick, per-agent configuration, finished set); ``horizon`` is in ticks."""
    params = params or SearchParams()
    model = TickModel.build(instance, tau, horizon)
    tau = model.tau
    stats = SearchStats()
    stats.extra.update(tau=tau, horizon=model.horizon, weight=params.weight)
    started = time.perf_counter()
    deadline = None if params.time_limit is None else started + params.time_limit
    adj = instance.graph.adjacency
    goals = instance.goals
    ctg = [[c / tau for c in row] for row in heuristic_table(instance)]
    w = params.weight
    max_g = params.tie_break == "max-g"

    def h(cfgs, done):
        total = 0.0
        for i, (frm, to, left) in enumerate(cfgs):
            if not done >> i & 1:
                total += left + ctg[i][to]
        return total

    def finish(outcome, key=None):
        stats.runtime_s = time.perf_counter() - started
        stats.outcome = outcome
        if key is None:
            return Solution("naive", None, [], stats, instance.time_scale)
        trace = []
        while key is not None:
            trace.append(key[1])
            key = parent[key]
        trace.reverse()
        paths = _paths(trace, tau)
        cost = sum(p.arrival for p in paths)
        return Solution("naive", cost, paths, stats, instance.time_scale)

    start_cfgs = tuple((s, s, 0) for s in instance.starts)
    root = (0, start_cfgs, 0)
    root_h = h(start_cfgs, 0)
    if root_h == INF:
        return finish(FAILURE)
    best = {root: 0}
    parent: dict = {root: None}
    heap = [(w * root_h, 0, 0, root)]
    closed: set = set()
    seq = 0
    hit_horizon = False
    while heap:
        key = heapq.heappop(heap)[-1]
        g = best[key]
        if key in closed:
            continue
        closed.add(key)
        tick, cfgs, done = key
        if all(c[2] == 0 and c[1] == goals[i] for i, c in enumerate(cfgs)):
            return finish(SOLVED, key)
        if tick >= model.horizon:
            hit_horizon = True
            continue
        stats.expanded += 1
        if params.expansion_limit is not None and stats.expanded > params.expansion_limit:
            return finish(LIMIT)
        if deadline is not None and stats.expanded % CHECK_EVERY == 0 and time.perf_counter() > deadline:
            return finish(TIMEOUT)
        for nxt, cost, newdone in _joint_moves(model, adj, goals, cfgs, done):
            stats.generated += 1
            nkey = (tick + 1, nxt, newdone)
            ng = g + cost
            if nkey in closed or ng >= best.get(nkey, INF):
                stats.pruned += 1
                continue
            hv = h(nxt, newdone)
            if hv == INF:
                continue
            best[nkey] = ng
            parent[nkey] = key
            seq += 1
            heapq.heappush(heap, (ng + w * hv, -ng if max_g else 0, seq, nkey))
    return finish(HORIZON if hit_horizon else FAILURE)
