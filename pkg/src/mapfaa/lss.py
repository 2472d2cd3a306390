"""Loosely synchronized A* (LS-A*).

Only the agents holding the smallest timestamp act at each expansion. Each of
them may move to any neighbor or wait; a wait lasts until the next distinct
timestamp in the state, or for the globally shortest edge duration when all
timestamps agree. States reaching the same joint vertex are compared by their
timestamp vectors and dominated ones are dropped.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Sequence

from .graph import Instance
from .solution import FAILURE, LIMIT, SOLVED, TIMEOUT, SearchStats, Solution, TimedPath, Waypoint
from .state import ConflictReport, Envelope, JointState, conflict_set, is_synchronized

INF = math.inf
CHECK_EVERY = 256


@dataclass(frozen=True)
class TimingSummary:
    t_min: int
    t_min2: int | None
    frontier_agents: tuple[int, ...]


def timing_summary(s: JointState | Sequence[Envelope]) -> TimingSummary:
    envs = s.envs if isinstance(s, JointState) else s
    t_min = min(e.t for e in envs)
    later = [e.t for e in envs if e.t != t_min]
    return TimingSummary(t_min, min(later) if later else None, tuple(i for i, e in enumerate(envs) if e.t == t_min))


def wait_quantum(summary: TimingSummary, min_duration: int) -> int:
    if summary.t_min2 is not None:
        return summary.t_min2 - summary.t_min
    return min_duration


# placeholder arrival for a wait whose end depends on what co-acting agents do
OPEN_WAIT = -1


def _moves(instance: Instance, i: int, env: Envelope, d_wait: int | None) -> list[Envelope]:
    v, t = env.v, env.t
    out = [Envelope(u, v, t + d, t) for u, d in instance.moves[i][v]]
    out.append(Envelope(v, v, OPEN_WAIT if d_wait is None else t + d_wait, t))
    return out


def individual_neighbors(
    s: JointState, i: int, instance: Instance, summary: TimingSummary | None = None, min_duration: int | None = None
) -> list[Envelope]:
    """Candidate envelopes for agent ``i``: moves in adjacency order, then the wait.

    The wait uses the fixed quantum (next distinct timestamp, or the smallest
    duration when all timestamps agree).
    """
    summary = summary or timing_summary(s)
    env = s.envs[i]
    if env.t != summary.t_min:
        return [env]
    if min_duration is None:
        min_duration = instance.min_duration()
    return _moves(instance, i, env, wait_quantum(summary, min_duration))


def next_bank(env: Envelope, new: Envelope, bank: int, goal: int) -> int:
    """Uncharged goal-wait time after ``env`` is replaced by ``new``.

    Waiting at the own goal is banked; leaving the goal charges the bank.
    """
    if new.p != new.v:
        return 0
    if new.v == goal:
        return bank + (new.t - env.t)
    return bank


def _close_waits(combo, summary: TimingSummary, min_duration: int, envs) -> tuple[Envelope, ...]:
    """Resolve open waits: they end at the next event of the child state.

    That is the earliest of the next distinct parent timestamp and the new
    arrival of any co-acting agent that does not wait; with neither, the
    smallest duration.
    """
    end = summary.t_min2
    for e, old in zip(combo, envs):
        if e is not old and e.t != OPEN_WAIT and (end is None or e.t < end):
            end = e.t
    if end is None:
        end = summary.t_min + min_duration
    return tuple(Envelope(e.v, e.p, end, e.tp) if e.t == OPEN_WAIT else e for e in combo)


def combine(
    s: JointState,
    options: list[list[Envelope]],
    goals: Sequence[int],
    summary: TimingSummary | None = None,
    min_duration: int | None = None,
) -> list[JointState]:
    """Cartesian combination of per-agent options into child states."""
    envs = s.envs
    bank = s.bank
    has_open = any(o.t == OPEN_WAIT for opts in options for o in opts)
    children = []
    for combo in itertools.product(*options):
        if has_open:
            combo = _close_waits(combo, summary, min_duration, envs)
        banks = tuple(
            b if new is old else next_bank(old, new, b, g) for new, old, b, g in zip(combo, envs, bank, goals)
        )
        children.append(JointState(tuple(combo), banks, s))
    return children


def get_ngh(
    s: JointState, instance: Instance, min_duration: int | None = None, wait_rule: str = "event"
) -> list[JointState]:
    """All children of ``s`` (no conflict filtering).

    ``wait_rule="fixed"`` gives every waiting agent the fixed quantum;
    ``"event"`` lets waits end at the child's next event instead.
    """
    summary = timing_summary(s)
    if min_duration is None:
        min_duration = instance.min_duration()
    d_wait = None if wait_rule == "event" else wait_quantum(summary, min_duration)
    options = [
        _moves(instance, i, env, d_wait) if env.t == summary.t_min else [env] for i, env in enumerate(s.envs)
    ]
    return combine(s, options, instance.goals, summary, min_duration)


def heuristic_table(instance: Instance) -> list[list[float]]:
    """Per-agent shortest time-to-go to the goal from every vertex (inf if unreachable)."""
    n_v = instance.graph.vertex_count
    tables = []
    for i in range(instance.agent_count):
        dist: list[float] = [INF] * n_v
        goal = instance.goals[i]
        dist[goal] = 0
        heap = [(0, goal)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for u in instance.graph.adjacency[v]:
                nd = d + instance.durations.lookup(i, u, v)
                if nd < dist[u]:
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))
        tables.append(dist)
    return tables


@dataclass
class SearchParams:
    weight: float = 1.0
    pruning: bool = True
    # "safe" adds the parent-vertex and goal-arrival guard to timestamp dominance
    dominance: str = "safe"
    time_limit: float | None = None
    expansion_limit: int | None = None
    tie_break: str = "max-g"
    wait_rule: str = "event"

    def __post_init__(self):
        if self.weight < 1:
            raise ValueError("heuristic weight must be >= 1")
        if self.dominance not in ("safe", "timestamp"):
            raise ValueError(f"unknown dominance rule {self.dominance!r}")
        if self.wait_rule not in ("event", "fixed"):
            raise ValueError(f"unknown wait rule {self.wait_rule!r}")
        if self.tie_break not in ("max-g", "fifo"):
            raise ValueError(f"unknown tie-break policy {self.tie_break!r}")


class FrontierSet:
    """Per joint vertex: retained non-dominated states and a synchronized-seen flag."""

    def __init__(self, dominance: str = "safe"):
        self._table: dict[tuple[int, ...], list] = {}
        self.safe = dominance == "safe"

    def __contains__(self, vertex) -> bool:
        return vertex in self._table

    def states(self, vertex) -> list[JointState]:
        entry = self._table.get(vertex)
        return list(entry[0]) if entry else []

    def synchronized_seen(self, vertex) -> bool:
        entry = self._table.get(vertex)
        return bool(entry and entry[1])

    def add(self, s: JointState, vertex=None) -> None:
        vertex = vertex if vertex is not None else s.vertex
        entry = self._table.get(vertex)
        if entry is None:
            entry = self._table[vertex] = [[], False]
        entry[0].append(s)
        if not entry[1] and is_synchronized(s):
            entry[1] = True

    def blocker(self, s: JointState, vertex=None) -> JointState | None:
        """A retained state equal to or dominating ``s``, else None."""
        vertex = vertex if vertex is not None else s.vertex
        entry = self._table.get(vertex)
        if entry is None:
            return None
        weak = entry[1]
        envs = s.envs
        for r in entry[0]:
            renvs = r.envs
            if renvs == envs:
                return r
            # the guarded rule only lets a synchronized state dominate weakly:
            # its agents are all idle, so they can wait into any later timing
            if weak and (not self.safe or _all_equal(renvs)):
                if any(a.t > b.t for a, b in zip(renvs, envs)):
                    continue
            elif any(a.t >= b.t for a, b in zip(renvs, envs)):
                continue
            if self.safe and not _guard(r, s):
                continue
            return r
        return None


def _all_equal(envs) -> bool:
    t = envs[0].t
    return all(e.t == t for e in envs)


def _guard(r: JointState, s: JointState) -> bool:
    """Extra conditions under which timestamp dominance of ``r`` over ``s`` is safe.

    Every agent of ``r`` must have arrived at its goal no later than in ``s``,
    and an unfinished move of ``r`` from a different parent vertex must end by
    the time ``s`` next acts.
    """
    t_min = min(e.t for e in s.envs)
    for a, b, ba, bb in zip(r.envs, s.envs, r.bank, s.bank):
        if a.t - ba > b.t - bb:
            return False
        if a.p != b.p and a.p != a.v and a.t > t_min:
            return False
    return True


def compare(s: JointState, frontier: FrontierSet) -> bool:
    """Keep ``s`` (and retain it in the frontier) unless an equal or dominating state exists."""
    if frontier.blocker(s) is not None:
        return False
    frontier.add(s)
    return True


def _path_for(chain: list[JointState], i: int) -> TimedPath:
    envs = []
    for s in chain:
        e = s.envs[i]
        if not envs or envs[-1] != e:
            envs.append(e)
    first = envs[0]
    points = [[first.v, first.t, None]]
    for e in envs[1:]:
        if e.p == e.v:
            continue
        points[-1][2] = e.tp
        points.append([e.v, e.t, None])
    points[-1][2] = points[-1][1]
    return TimedPath(i, [Waypoint(v, a, d) for v, a, d in points])


def reconstruct(s: JointState, algorithm: str = "lsa", stats: SearchStats | None = None, time_scale: int = 1) -> Solution:
    chain = []
    node: JointState | None = s
    while node is not None:
        chain.append(node)
        node = node.parent
        if len(chain) > 10_000_000:
            raise RuntimeError("parent chain does not terminate")
    chain.reverse()
    first = chain[0]
    if any(e.p != e.v or e.t != 0 for e in first.envs):
        raise RuntimeError("parent chain does not end at an initial state")
    paths = [_path_for(chain, i) for i in range(len(s.envs))]
    return Solution(algorithm, s.g, paths, stats or SearchStats(outcome=SOLVED), time_scale)


class SearchTimeout(Exception):
    def __init__(self, outcome: str):
        super().__init__(outcome)
        self.outcome = outcome


class LSSearch:
    """Best-first search over loosely synchronized states.

    Subclasses change neighbor generation and react to conflicts and pruning.
    """

    name = "lsa"

    def __init__(self, instance: Instance, params: SearchParams | None = None, root: JointState | None = None,
                 deadline: float | None = None, stats: SearchStats | None = None):
        self.instance = instance
        self.params = params or SearchParams()
        self.goal = tuple(instance.goals)
        self.ctg = heuristic_table(instance)
        self.min_duration = instance.min_duration()
        self.root = root if root is not None else JointState.initial(instance.starts)
        self.stats = stats if stats is not None else SearchStats()
        if deadline is None and self.params.time_limit is not None:
            deadline = time.perf_counter() + self.params.time_limit
        self.deadline = deadline
        self.frontier = FrontierSet(self.params.dominance)
        self.seen: set = set()
        self.open: list = []
        self._seq = 0
        self._expanded_here = 0

    def heuristic(self, s: JointState) -> float:
        ctg = self.ctg
        return sum(ctg[i][e.v] for i, e in enumerate(s.envs))

    def push(self, s: JointState) -> None:
        w = self.params.weight
        s.f = s.g + s.h if w == 1 else s.g + w * s.h
        self._seq += 1
        tie = -s.g if self.params.tie_break == "max-g" else 0
        heapq.heappush(self.open, (s.f, tie, self._seq, s))

    def children(self, s: JointState) -> list[JointState]:
        return get_ngh(s, self.instance, self.min_duration, self.params.wait_rule)

    def conflicts(self, child: JointState) -> ConflictReport:
        return conflict_set(child.envs)

    def on_conflict(self, parent: JointState, child: JointState, report: ConflictReport) -> None:
        pass

    def on_blocked(self, parent: JointState, child: JointState, blocker: JointState) -> None:
        pass

    def on_keep(self, parent: JointState, child: JointState) -> None:
        pass

    def skip_on_pop(self, s: JointState) -> bool:
        return False

    def mark_expanded(self, s: JointState) -> None:
        pass

    def _blocked(self, child: JointState):
        if self.params.pruning:
            return self.frontier.blocker(child)
        return child if child.envs in self.seen else None

    def _retain(self, child: JointState) -> None:
        if self.params.pruning:
            self.frontier.add(child)
        else:
            self.seen.add(child.envs)

    def _tick(self) -> None:
        self.stats.expanded += 1
        self._expanded_here += 1
        limit = self.params.expansion_limit
        if limit is not None and self.stats.expanded > limit:
            raise SearchTimeout(LIMIT)
        if self.deadline is not None and self._expanded_here % CHECK_EVERY == 0 and time.perf_counter() > self.deadline:
            raise SearchTimeout(TIMEOUT)

    def solve_state(self) -> JointState | None:
        """Run the search; return the goal state or None when OPEN depletes."""
        root = self.root
        root.h = self.heuristic(root)
        if root.h == INF or conflict_set(root.envs):
            return None
        self._retain(root)
        self.push(root)
        goal = self.goal
        stats = self.stats
        while self.open:
            s = heapq.heappop(self.open)[-1]
            if self.skip_on_pop(s):
                continue
            if all(e.v == gv for e, gv in zip(s.envs, goal)):
                return s
            self._tick()
            self.mark_expanded(s)
            for child in self.children(s):
                stats.generated += 1
                report = self.conflicts(child)
                if report:
                    stats.extra["conflicts"] = stats.extra.get("conflicts", 0) + 1
                    self.on_conflict(s, child, report)
                    continue
                blocker = self._blocked(child)
                if blocker is not None:
                    stats.pruned += 1
                    self.on_blocked(s, child, blocker)
                    continue
                child.h = self.heuristic(child)
                self._retain(child)
                self.on_keep(s, child)
                if child.h == INF:
                    continue
                self.push(child)
        return None

    def run(self) -> Solution:
        start = time.perf_counter()
        try:
            goal_state = self.solve_state()
            outcome = SOLVED if goal_state is not None else FAILURE
        except SearchTimeout as exc:
            goal_state, outcome = None, exc.outcome
        self.stats.runtime_s = time.perf_counter() - start
        self.stats.outcome = outcome
        self.stats.extra.setdefault("weight", self.params.weight)
        if goal_state is None:
            return Solution(self.name, None, [], self.stats, self.instance.time_scale)
        return reconstruct(goal_state, self.name, self.stats, self.instance.time_scale)


def search(instance: Instance, params: SearchParams | None = None) -> Solution:
    """LS-A*: optimal for weight 1, within ``weight`` x optimal otherwise."""
    return LSSearch(instance, params).run()
