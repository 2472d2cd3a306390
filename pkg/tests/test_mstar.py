import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapfaa.fixtures import four_cycle, line
from mapfaa.graph import empty_grid, gen_uniform_durations, grid_instance, random_pairs
from mapfaa.lss import get_ngh, heuristic_table, search
from mapfaa.mstar import (
    MStarSearch,
    backpropagate,
    build_policy,
    get_ngh_restricted,
    groups_from_pairs,
    partition_merge,
    search_lsm,
    search_lsrm,
)
from mapfaa.solution import FAILURE, SOLVED
from mapfaa.state import Envelope, JointState
from mapfaa.validate import brute_force_oracle, validate

a, b, c, d = range(4)


def test_policy_tie_break_prefers_smaller_id():
    inst = four_cycle(1, 2)
    p0 = build_policy(inst, 0)
    assert p0(a) == b and p0(d) == d
    assert p0.ctg[a] == 2
    p1 = build_policy(inst, 1)
    assert p1(d) == b and p1(a) == a


def test_line_policy():
    inst = line((1,), ((0, 2),))
    p = build_policy(inst, 0)
    assert (p(0), p(1), p(2)) == (1, 2, 2)


def test_restricted_without_collisions_follows_policies():
    inst = four_cycle(1, 1)
    pol = [build_policy(inst, i) for i in range(2)]
    kids = get_ngh_restricted(JointState.initial(inst.starts), inst, pol, frozenset())
    assert len(kids) == 1
    assert kids[0].envs == (Envelope(b, a, 1, 0), Envelope(b, d, 1, 0))


def test_full_collision_set_matches_get_ngh():
    inst = four_cycle(1, 2)
    pol = [build_policy(inst, i) for i in range(2)]
    s = JointState.initial(inst.starts)
    restricted = get_ngh_restricted(s, inst, pol, {0, 1})
    assert [k.envs for k in restricted] == [k.envs for k in get_ngh(s, inst)]


def test_backpropagate_grows_parent_once():
    parent = JointState.initial((0, 1))
    reopened = []
    assert backpropagate(parent, {0, 1}, reopened.append) == 1
    assert parent.ic == {0, 1} and reopened == [parent]
    assert backpropagate(parent, {1}, reopened.append) == 0
    assert reopened == [parent]


def test_backpropagate_chain():
    s0, s1, s2 = (JointState.initial((0, 1)) for _ in range(3))
    s2.back[id(s1)] = s1
    s1.back[id(s0)] = s0
    reopened = []
    assert backpropagate(s2, {0, 1}, reopened.append) == 3
    assert reopened == [s2, s1, s0]
    assert all(s.ic == {0, 1} for s in (s0, s1, s2))


def test_partition_merge():
    groups = groups_from_pairs([(0, 1), (2, 3)])
    assert groups == {frozenset({0, 1}), frozenset({2, 3})}
    assert partition_merge(groups, [frozenset({1, 2})]) == {frozenset({0, 1, 2, 3})}


@pytest.mark.parametrize("solver", [search_lsm, search_lsrm])
@pytest.mark.parametrize("d1,d2,cost", [(1, 1, 4), (1, 2, 7)])
def test_four_cycle(solver, d1, d2, cost):
    inst = four_cycle(d1, d2)
    sol = solver(inst)
    assert sol.cost == cost
    assert validate(sol, inst).ok


@pytest.mark.parametrize("solver", [search_lsm, search_lsrm])
def test_opposing_line(solver):
    assert solver(line()).stats.outcome == FAILURE


@pytest.mark.parametrize("seed", range(8))
def test_two_agent_recursive_matches_lsm(seed):
    grid = empty_grid(3, 3)
    inst = grid_instance(grid, random_pairs(grid[0], 2, seed), gen_uniform_durations(2, 3, seed))
    assert search_lsrm(inst).cost == search_lsm(inst).cost


def test_conflict_free_needs_no_recursion():
    grid = empty_grid(3, 3)
    inst = grid_instance(grid, [(0, 2), (3, 5), (6, 8)], gen_uniform_durations(3, 1, 0))
    sol = search_lsrm(inst)
    assert sol.stats.extra.get("recursive_calls", 0) == 0
    assert sol.cost == 6


def test_single_conflicting_pair_is_planned_as_a_group():
    grid = empty_grid(3, 3)
    # agents 0 and 1 swap along the top row, agent 2 runs the bottom row
    inst = grid_instance(grid, [(0, 2), (2, 0), (6, 8)], gen_uniform_durations(3, 1, 0))
    sol = search_lsrm(inst)
    assert sol.stats.outcome == SOLVED
    assert sol.cost == brute_force_oracle(inst)
    assert sol.stats.extra["recursive_calls"] >= 1
    assert [(w.v, w.arrive) for w in sol.paths[2].waypoints] == [(6, 0), (7, 1), (8, 2)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_policy_consistency(seed, k):
    grid = empty_grid(4, 4)
    inst = grid_instance(grid, random_pairs(grid[0], 2, seed), gen_uniform_durations(2, k, seed))
    ctg = heuristic_table(inst)
    for i in range(2):
        p = build_policy(inst, i, ctg[i])
        assert p(inst.goals[i]) == inst.goals[i]
        for u in range(inst.graph.vertex_count):
            if u != inst.goals[i]:
                assert ctg[i][u] == inst.duration(i, u, p(u)) + ctg[i][p(u)]


class Watching(MStarSearch):
    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.seen = {}

    def reopen(self, s):
        prev = self.seen.get(id(s), frozenset())
        assert prev <= s.ic
        self.seen[id(s)] = s.ic
        super().reopen(s)


@pytest.mark.parametrize("seed", range(5))
def test_collision_sets_only_grow(seed):
    grid = empty_grid(3, 3)
    inst = grid_instance(grid, random_pairs(grid[0], 3, seed), gen_uniform_durations(3, 2, seed))
    sol = Watching(inst).run()
    assert sol.cost == search(inst).cost
