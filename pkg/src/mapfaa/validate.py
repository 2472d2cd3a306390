"""Solver-independent plan checking, cost accounting and a brute-force oracle.

Nothing here reuses the search code's occupancy or conflict logic, so the two
can check each other.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterator

from .graph import Instance
from .solution import Solution, TimedPath

FOREVER = math.inf


@dataclass(frozen=True)
class Span:
    """A time interval with independently open or closed ends."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def intersect(self, other: Span) -> Span | None:
        if self.lo > other.lo:
            lo, lo_c = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_c = other.lo, other.lo_closed
        else:
            lo, lo_c = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_c = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_c = other.hi, other.hi_closed
        else:
            hi, hi_c = self.hi, self.hi_closed and other.hi_closed
        if lo < hi or (lo == hi and lo_c and hi_c):
            return Span(lo, hi, lo_c, hi_c)
        return None


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    conflicts: list[tuple[tuple[int, int], int, Span]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors and not self.conflicts


def _occupied(path: TimedPath) -> list[tuple[int, Span]]:
    """(vertex, span) pieces covering everything the agent occupies."""
    pieces = []
    wps = path.waypoints
    for k, w in enumerate(wps):
        last = k == len(wps) - 1
        pieces.append((w.v, Span(w.arrive, FOREVER if last else w.depart, True, not last)))
        if not last:
            nxt = wps[k + 1]
            if nxt.v != w.v and nxt.arrive > w.depart:
                between = Span(w.depart, nxt.arrive, False, False)
                pieces.append((w.v, between))
                pieces.append((nxt.v, between))
    return pieces


def _structure(path: TimedPath, inst: Instance) -> list[str]:
    i = path.agent
    errs = []
    wps = path.waypoints
    if not wps:
        return [f"agent {i}: empty path"]
    if wps[0].v != inst.starts[i] or wps[0].arrive != 0:
        errs.append(f"agent {i}: path must start at vertex {inst.starts[i]} at time 0")
    if wps[-1].v != inst.goals[i]:
        errs.append(f"agent {i}: path ends at {wps[-1].v}, goal is {inst.goals[i]}")
    for k, w in enumerate(wps):
        if not 0 <= w.v < inst.graph.vertex_count:
            errs.append(f"agent {i}: waypoint {k} vertex {w.v} is not in the graph")
            return errs
        if w.depart < w.arrive:
            errs.append(f"agent {i}: waypoint {k} departs before it arrives")
    for k in range(len(wps) - 1):
        a, b = wps[k], wps[k + 1]
        if a.v == b.v:
            if b.arrive != a.depart:
                errs.append(f"agent {i}: wait at {a.v} leaves a gap between waypoints {k} and {k + 1}")
            continue
        if b.v not in inst.graph.adjacency[a.v]:
            errs.append(f"agent {i}: {a.v} and {b.v} are not adjacent (waypoints {k}, {k + 1})")
            continue
        need = inst.durations.lookup(i, a.v, b.v)
        if b.arrive - a.depart != need:
            errs.append(f"agent {i}: move {a.v}->{b.v} takes {b.arrive - a.depart}, expected {need}")
    return errs


def validate(solution: Solution, inst: Instance) -> ValidationReport:
    """Check structure, then sweep every agent pair for shared occupancy.

    Agents stay on their final waypoint forever.
    """
    report = ValidationReport()
    agents = sorted(p.agent for p in solution.paths)
    if agents != list(range(inst.agent_count)):
        report.errors.append(f"expected one path per agent 0..{inst.agent_count - 1}, got {agents}")
        return report
    paths = sorted(solution.paths, key=lambda p: p.agent)
    for p in paths:
        report.errors.extend(_structure(p, inst))
    if report.errors:
        return report
    occ = [_occupied(p) for p in paths]
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            for v, si in occ[i]:
                for u, sj in occ[j]:
                    if u != v:
                        continue
                    hit = si.intersect(sj)
                    if hit is not None:
                        report.conflicts.append(((i, j), v, hit))
    if solution.cost is not None and solution.cost != solution_cost(solution, inst):
        report.errors.append(f"declared cost {solution.cost} != recomputed {solution_cost(solution, inst)}")
    return report


def solution_cost(solution: Solution, inst: Instance | None = None) -> int:
    """Sum over agents of the arrival time at their final waypoint (the goal).

    Waits at the goal after the final arrival are free; earlier goal visits
    followed by a departure are not final, so their waits count.
    """
    return sum(p.arrival for p in solution.paths)


class OracleError(RuntimeError):
    pass


def _gcd_all(values) -> int:
    return reduce(math.gcd, values, 0)


def _ctg_ticks(inst: Instance, i: int, tau: int) -> list[float]:
    # plain Bellman-Ford style relaxation, deliberately not shared with the search code
    n = inst.graph.vertex_count
    dist = [FOREVER] * n
    dist[inst.goals[i]] = 0
    changed = True
    while changed:
        changed = False
        for u in range(n):
            for v in inst.graph.adjacency[u]:
                c = dist[v] + inst.durations.lookup(i, u, v) // tau
                if c < dist[u]:
                    dist[u] = c
                    changed = True
    return dist


def brute_force_oracle(
    inst: Instance,
    horizon: int | None = None,
    tau: int | None = None,
    max_states: int = 3_000_000,
    use_bound: bool = True,
) -> int | None:
    """Exact minimal sum of completion times, or None if no plan exists.

    Searches the joint tick lattice (tick = ``tau``, the gcd of all durations
    by default). Each agent is idle at a vertex, part-way along an edge, or
    finished (parked at its goal for good). Without ``horizon`` the lattice is
    searched without a clock, which is exhaustive because the dynamics do not
    depend on absolute time; with ``horizon`` (in time units) the tick is part
    of the state and plans must finish by then. ``use_bound`` orders the search
    with a simple admissible bound (unobstructed time to go); it never changes
    the answer.
    """
    if tau is None:
        tau = _gcd_all(inst.all_durations()) or 1
    if any(d % tau for d in inst.all_durations()):
        raise OracleError(f"tick {tau} does not divide every duration")
    n = inst.agent_count
    adj = inst.graph.adjacency
    goals = inst.goals
    ticks = [
        {(u, v): inst.durations.lookup(i, u, v) // tau for u in range(len(adj)) for v in adj[u]} for i in range(n)
    ]
    ctg = [_ctg_ticks(inst, i, tau) for i in range(n)] if use_bound else None
    max_tick = None if horizon is None else horizon // tau
    full = (1 << n) - 1

    # agent config: (frm, to, left); left == 0 means idle at `to`
    def bound(cfgs, done) -> float:
        if ctg is None:
            return 0
        total = 0
        for i, (frm, to, left) in enumerate(cfgs):
            if not done >> i & 1:
                total += left + ctg[i][to]
        return total

    def at_instant(cfg):
        frm, to, left = cfg
        return (to,) if left == 0 else (frm, to)

    def options(i, cfg, finished):
        frm, to, left = cfg
        if finished:
            yield cfg, (to,), 0, True
            return
        if left:
            nxt = (frm, to, left - 1) if left > 1 else (to, to, 0)
            yield nxt, (frm, to), 1, False
            return
        v = to
        if v == goals[i]:
            yield cfg, (v,), 0, True
        yield cfg, (v,), 1, False
        for u in adj[v]:
            k = ticks[i][(v, u)]
            yield ((v, u, k - 1) if k > 1 else (u, u, 0)), (v, u), 1, False

    def successors(cfgs, done) -> Iterator[tuple[tuple, int, int]]:
        chosen_cfg = [None] * n
        chosen_occ: list[tuple] = [()] * n

        def rec(i, cost, newdone):
            if i == n:
                # instant occupancy of the next state must be pairwise disjoint
                seen = set()
                for c in chosen_cfg:
                    for x in at_instant(c):
                        if x in seen:
                            return
                        seen.add(x)
                yield tuple(chosen_cfg), cost, newdone
                return
            fin = bool(done >> i & 1)
            for nxt, occ, c, fin_after in options(i, cfgs[i], fin):
                clash = False
                for j in range(i):
                    for x in occ:
                        if x in chosen_occ[j]:
                            clash = True
                            break
                    if clash:
                        break
                if clash:
                    continue
                chosen_cfg[i] = nxt
                chosen_occ[i] = occ
                yield from rec(i + 1, cost + c, newdone | (1 << i) if fin_after else newdone)

        yield from rec(0, 0, done)

    start_cfgs = tuple((s, s, 0) for s in inst.starts)
    if len(set(inst.starts)) != n:
        return None
    start_key = (start_cfgs, 0, 0) if max_tick is not None else (start_cfgs, 0)
    best = {start_key: 0}
    heap = [(bound(start_cfgs, 0), 0, 0, start_key)]
    counter = 0
    while heap:
        f, g, _, key = heapq.heappop(heap)
        if g > best.get(key, FOREVER):
            continue
        cfgs, done = key[0], key[1]
        tick = key[2] if max_tick is not None else 0
        if all(c[2] == 0 and c[1] == goals[i] for i, c in enumerate(cfgs)):
            return g * tau
        if max_tick is not None and tick >= max_tick:
            continue
        for nxt, cost, newdone in successors(cfgs, done):
            if newdone == full and cost == 0:
                continue
            nkey = (nxt, newdone, tick + 1) if max_tick is not None else (nxt, newdone)
            ng = g + cost
            if ng < best.get(nkey, FOREVER):
                best[nkey] = ng
                if len(best) > max_states:
                    raise OracleError(f"oracle state cap {max_states} exceeded")
                counter += 1
                heapq.heappush(heap, (ng + bound(nxt, newdone), ng, counter, nkey))
    return None
