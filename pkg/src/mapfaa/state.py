"""Spatio-temporal search states, occupancy, conflicts and dominance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence


class Envelope(NamedTuple):
    """An agent's latest action: it left ``p`` at ``tp`` and reaches ``v`` at ``t``.

    The initial envelope and wait envelopes have ``p == v``.
    """

    v: int
    p: int
    t: int
    tp: int


class JointState:
    """One envelope per agent plus search bookkeeping.

    ``bank`` holds, per agent, the time spent waiting at its own goal that has
    not been charged yet. The per-agent cost is ``t - bank`` and ``g`` is its
    sum. ``ic`` is the collision set used by the M*-style searches.
    """

    __slots__ = ("envs", "bank", "g", "parent", "ic", "back", "f", "h", "expanded_ic", "__weakref__")

    def __init__(self, envs: tuple[Envelope, ...], bank: tuple[int, ...], parent: JointState | None = None, ic=frozenset()):
        self.envs = envs
        self.bank = bank
        self.g = sum(e.t for e in envs) - sum(bank)
        self.parent = parent
        self.ic = ic
        self.back: dict[int, JointState] = {}
        self.f = 0
        self.h = 0
        self.expanded_ic = None

    @classmethod
    def initial(cls, starts: Sequence[int]) -> JointState:
        return cls(tuple(Envelope(v, v, 0, 0) for v in starts), (0,) * len(starts))

    @property
    def vertex(self) -> tuple[int, ...]:
        """The joint vertex."""
        return tuple(e.v for e in self.envs)

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(e.t for e in self.envs)

    def agent_costs(self) -> tuple[int, ...]:
        return tuple(e.t - b for e, b in zip(self.envs, self.bank))

    def key(self) -> tuple:
        return self.envs

    def same_as(self, other: JointState) -> bool:
        return self.envs == other.envs

    def __repr__(self) -> str:
        return f"JointState({list(self.envs)!r}, g={self.g})"


def check_envelope(env: Envelope, duration=None) -> None:
    """Raise ValueError when an envelope breaks its structural invariants."""
    if env.tp > env.t:
        raise ValueError(f"departure after arrival in {env}")
    if env.tp == env.t and env.p != env.v:
        raise ValueError(f"zero-length move in {env}")
    if duration is not None and env.p != env.v and env.t - env.tp != duration(env.p, env.v):
        raise ValueError(f"move duration mismatch in {env}")


def occupancy(env: Envelope, t: int) -> frozenset[int]:
    if t < env.tp or t > env.t:
        raise ValueError(f"time {t} outside [{env.tp}, {env.t}]")
    if env.p == env.v or t == env.t:
        return frozenset((env.v,))
    if t == env.tp:
        return frozenset((env.p,))
    return frozenset((env.p, env.v))


@dataclass
class ConflictReport:
    agents: frozenset[int] = frozenset()
    # (pair, vertex, (lo, hi, open_interval)) -- a point when lo == hi
    witnesses: list[tuple[tuple[int, int], int, tuple[int, int, bool]]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.agents)

    def pairs(self) -> list[tuple[int, int]]:
        return [w[0] for w in self.witnesses]


def _pair_conflict(a: Envelope, b: Envelope):
    """First shared vertex of two envelopes over their common window, if any."""
    lo = a.tp if a.tp > b.tp else b.tp
    hi = a.t if a.t < b.t else b.t
    if lo > hi:
        return None
    shared = occupancy(a, lo) & occupancy(b, lo)
    if shared:
        return min(shared), (lo, lo, False)
    if lo < hi:
        ia = {a.p, a.v}
        ib = {b.p, b.v}
        shared = ia & ib
        if shared:
            return min(shared), (lo, hi, True)
        shared = occupancy(a, hi) & occupancy(b, hi)
        if shared:
            return min(shared), (hi, hi, False)
    return None


def conflict_set(envs: Sequence[Envelope] | JointState) -> ConflictReport:
    """Pairwise vertex-occupancy conflicts over each pair's common time window."""
    if isinstance(envs, JointState):
        envs = envs.envs
    agents: set[int] = set()
    witnesses = []
    n = len(envs)
    for i in range(n):
        a = envs[i]
        for j in range(i + 1, n):
            hit = _pair_conflict(a, envs[j])
            if hit is not None:
                agents.add(i)
                agents.add(j)
                witnesses.append(((i, j), hit[0], hit[1]))
    return ConflictReport(frozenset(agents), witnesses)


def has_conflict(envs: Sequence[Envelope]) -> bool:
    n = len(envs)
    for i in range(n):
        a = envs[i]
        for j in range(i + 1, n):
            if _pair_conflict(a, envs[j]) is not None:
                return True
    return False


def _same_vertex(s1: JointState, s2: JointState) -> None:
    if any(a.v != b.v for a, b in zip(s1.envs, s2.envs)) or len(s1.envs) != len(s2.envs):
        raise ValueError("dominance is only defined for states at the same joint vertex")


def strictly_dominates(s1: JointState, s2: JointState) -> bool:
    _same_vertex(s1, s2)
    return all(a.t < b.t for a, b in zip(s1.envs, s2.envs))


def weakly_dominates(s1: JointState, s2: JointState) -> bool:
    _same_vertex(s1, s2)
    return all(a.t <= b.t for a, b in zip(s1.envs, s2.envs))


def is_synchronized(s: JointState | Sequence[Envelope]) -> bool:
    envs = s.envs if isinstance(s, JointState) else s
    t0 = envs[0].t
    return all(e.t == t0 for e in envs)
