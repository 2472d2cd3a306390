"""LS-M* and LS-rM*: loosely synchronized search in a space of varying dimension.

Agents outside the collision set of a state follow their individual optimal
policy; agents inside it get the full set of moves and the wait. Conflicts
found among the children enlarge the collision set of the parent and of every
registered predecessor, which are then put back on OPEN.

LS-rM* keeps the collision set as disjoint agent groups and lets each group
that is smaller than the whole problem follow a jointly planned path obtained
from a recursive call on the group alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .graph import Instance
from .lss import INF, OPEN_WAIT, LSSearch, SearchParams, _moves, combine, heuristic_table, timing_summary, wait_quantum
from .solution import Solution
from .state import ConflictReport, Envelope, JointState


@dataclass(frozen=True)
class Policy:
    """Next vertex along an optimal individual path (None where the goal is unreachable)."""

    next: tuple[int | None, ...]
    ctg: tuple[float, ...]

    def __call__(self, v: int) -> int | None:
        return self.next[v]


def build_policy(instance: Instance, i: int, ctg: list[float] | None = None) -> Policy:
    if ctg is None:
        ctg = heuristic_table(instance)[i]
    goal = instance.goals[i]
    nxt: list[int | None] = []
    for v, row in enumerate(instance.moves[i]):
        if v == goal:
            nxt.append(goal)
            continue
        best, best_u = INF, None
        # adjacency is sorted, so strict < keeps the smallest id on ties
        for u, d in row:
            c = d + ctg[u]
            if c < best:
                best, best_u = c, u
        nxt.append(best_u)
    return Policy(tuple(nxt), tuple(ctg))


def _wait(env: Envelope, d_wait: int | None) -> Envelope:
    return Envelope(env.v, env.v, OPEN_WAIT if d_wait is None else env.t + d_wait, env.t)


def policy_envelope(
    policy: Policy, env: Envelope, goal: int, instance: Instance, i: int, d_wait: int | None
) -> Envelope | None:
    v, t = env.v, env.t
    if v == goal:
        return _wait(env, d_wait)
    u = policy.next[v]
    if u is None:
        return None
    return Envelope(u, v, t + instance.durations.lookup(i, v, u), t)


def get_ngh_restricted(
    s: JointState,
    instance: Instance,
    policies: list[Policy],
    collision_set: Iterable[int] | None = None,
    min_duration: int | None = None,
    wait_rule: str = "event",
) -> list[JointState]:
    """Children of ``s`` where acting agents outside the collision set follow their policy."""
    ic = s.ic if collision_set is None else frozenset(collision_set)
    summary = timing_summary(s)
    if min_duration is None:
        min_duration = instance.min_duration()
    d_wait = None if wait_rule == "event" else wait_quantum(summary, min_duration)
    options = []
    for i, env in enumerate(s.envs):
        if env.t != summary.t_min:
            options.append([env])
        elif i in ic:
            options.append(_moves(instance, i, env, d_wait))
        else:
            nxt = policy_envelope(policies[i], env, instance.goals[i], instance, i, d_wait)
            if nxt is None:
                return []
            options.append([nxt])
    return combine(s, options, instance.goals, summary, min_duration)


def union_merge(current: frozenset, new: Iterable) -> frozenset:
    return current | frozenset(new)


def partition_merge(current: frozenset, new: Iterable[frozenset]) -> frozenset:
    """Union two collections of agent groups, merging groups that share an agent."""
    groups = [set(g) for g in current]
    for g in new:
        g = set(g)
        keep = []
        for h in groups:
            if h & g:
                g |= h
            else:
                keep.append(h)
        keep.append(g)
        groups = keep
    return frozenset(frozenset(g) for g in groups)


def groups_from_pairs(pairs: Iterable[tuple[int, int]]) -> frozenset:
    return partition_merge(frozenset(), (frozenset(p) for p in pairs))


def backpropagate(
    s: JointState,
    colliding,
    reopen: Callable[[JointState], None],
    merge: Callable = union_merge,
) -> int:
    """Grow the collision set of ``s`` and, transitively, of its predecessors.

    Every state whose set actually grows is handed to ``reopen``. Returns the
    number of states that grew.
    """
    grown = 0
    stack = [(s, colliding)]
    while stack:
        node, new = stack.pop()
        merged = merge(node.ic, new)
        if merged == node.ic:
            continue
        node.ic = merged
        grown += 1
        reopen(node)
        for pred in node.back.values():
            stack.append((pred, merged))
    return grown


class MStarSearch(LSSearch):
    name = "lsm"
    merge = staticmethod(union_merge)

    def __init__(self, instance: Instance, params: SearchParams | None = None, root: JointState | None = None,
                 deadline: float | None = None, stats=None, full_collision_set: bool = False):
        super().__init__(instance, params, root, deadline, stats)
        self.policies = [build_policy(instance, i, self.ctg[i]) for i in range(instance.agent_count)]
        self.full = frozenset(range(instance.agent_count)) if full_collision_set else None
        if self.full is not None:
            self.root.ic = self.full

    def children(self, s: JointState) -> list[JointState]:
        return get_ngh_restricted(s, self.instance, self.policies, s.ic, self.min_duration, self.params.wait_rule)

    def reopen(self, s: JointState) -> None:
        if s.expanded_ic is not None:
            self.stats.extra["reopened"] = self.stats.extra.get("reopened", 0) + 1
            self.push(s)

    def collision_of(self, report: ConflictReport):
        return report.agents

    def on_conflict(self, parent, child, report):
        backpropagate(parent, self.collision_of(report), self.reopen, self.merge)

    def on_blocked(self, parent, child, blocker):
        blocker.back[id(parent)] = parent
        if blocker.ic:
            backpropagate(parent, blocker.ic, self.reopen, self.merge)

    def on_keep(self, parent, child):
        child.back[id(parent)] = parent
        if self.full is not None:
            child.ic = self.full

    def skip_on_pop(self, s):
        return s.expanded_ic is not None and s.expanded_ic == s.ic

    def mark_expanded(self, s):
        s.expanded_ic = s.ic


class RecursiveMStarSearch(MStarSearch):
    name = "lsrm"
    merge = staticmethod(partition_merge)

    def __init__(self, instance: Instance, params: SearchParams | None = None, root: JointState | None = None,
                 deadline: float | None = None, stats=None, memo: dict | None = None, agent_ids=None):
        super().__init__(instance, params, root, deadline, stats)
        self.everyone = frozenset(range(instance.agent_count))
        # ids of these agents in the top-level instance; sub-planners share one memo
        self.agent_ids = tuple(range(instance.agent_count)) if agent_ids is None else tuple(agent_ids)
        # (original agent ids, group envelopes, group banks) -> (planned chain of group states, position)
        self.memo: dict[tuple, tuple[list, int] | None] = {} if memo is None else memo

    def collision_of(self, report: ConflictReport):
        return groups_from_pairs(report.pairs())

    def subplan(self, group: tuple[int, ...], s: JointState):
        ids = tuple(self.agent_ids[i] for i in group)
        key = (ids, tuple(s.envs[i] for i in group), tuple(s.bank[i] for i in group))
        if key in self.memo:
            return self.memo[key]
        extra = self.stats.extra
        extra["recursive_calls"] = extra.get("recursive_calls", 0) + 1
        sub = self.instance.subset(group)
        root = JointState(key[1], key[2])
        planner = RecursiveMStarSearch(sub, self.params, root, self.deadline, self.stats, self.memo, ids)
        goal_state = planner.solve_state()
        if goal_state is None:
            self.memo[key] = None
            return None
        chain = []
        node = goal_state
        while node is not None:
            chain.append(node)
            node = node.parent
        chain.reverse()
        for k, st in enumerate(chain):
            self.memo.setdefault((ids, st.envs, st.bank), (chain, k))
        return self.memo[key]

    def children(self, s: JointState) -> list[JointState]:
        summary = timing_summary(s)
        d_wait = None if self.params.wait_rule == "event" else wait_quantum(summary, self.min_duration)
        owner = {a: g for g in s.ic for a in g}
        instance = self.instance
        goals = instance.goals
        options: list[list[Envelope] | None] = [None] * len(s.envs)
        for i, env in enumerate(s.envs):
            if options[i] is not None:
                continue
            if env.t != summary.t_min:
                options[i] = [env]
                continue
            g = owner.get(i)
            if g is None:
                nxt = policy_envelope(self.policies[i], env, goals[i], instance, i, d_wait)
                if nxt is None:
                    return []
                options[i] = [nxt]
            elif g == self.everyone:
                options[i] = _moves(instance, i, env, d_wait)
            else:
                group = tuple(sorted(g))
                if all(s.envs[a].v == goals[a] for a in group):
                    for a in group:
                        e = s.envs[a]
                        options[a] = [_wait(e, d_wait)] if e.t == summary.t_min else [e]
                    continue
                plan = self.subplan(group, s)
                if plan is None:
                    return []
                chain, k = plan
                nxt_envs = chain[k + 1].envs if k + 1 < len(chain) else None
                for pos, a in enumerate(group):
                    e = s.envs[a]
                    if e.t != summary.t_min:
                        options[a] = [e]
                    elif nxt_envs is None:
                        options[a] = [_wait(e, d_wait)]
                    else:
                        options[a] = [nxt_envs[pos]]
        return combine(s, options, goals, summary, self.min_duration)


def search_lsm(instance: Instance, params: SearchParams | None = None, full_collision_set: bool = False) -> Solution:
    """LS-M*. With ``full_collision_set`` every agent is always coupled (plain LS-A* behavior)."""
    return MStarSearch(instance, params, full_collision_set=full_collision_set).run()


def search_lsrm(instance: Instance, params: SearchParams | None = None) -> Solution:
    return RecursiveMStarSearch(instance, params).run()
