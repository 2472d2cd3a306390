import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapfaa.fixtures import four_cycle, line
from mapfaa.graph import DurationTable, Graph, Instance, empty_grid, gen_uniform_durations, grid_instance, random_pairs
from mapfaa.lss import (
    FrontierSet,
    LSSearch,
    SearchParams,
    compare,
    get_ngh,
    heuristic_table,
    individual_neighbors,
    reconstruct,
    search,
    timing_summary,
)
from mapfaa.solution import FAILURE, LIMIT, SOLVED
from mapfaa.state import Envelope, JointState, has_conflict, is_synchronized
from mapfaa.validate import solution_cost, validate

a, b, c, d = range(4)


def at(*times, v=None):
    v = v or tuple(range(len(times)))
    return JointState(tuple(Envelope(x, x, t, 0) for x, t in zip(v, times)), (0,) * len(times))


@pytest.mark.parametrize(
    "times,t_min,t_min2,frontier",
    [((2, 3), 2, 3, (0,)), ((5, 5, 5), 5, None, (0, 1, 2)), ((2, 2, 7), 2, 7, (0, 1))],
)
def test_timing_summary(times, t_min, t_min2, frontier):
    ts = timing_summary(at(*times))
    assert (ts.t_min, ts.t_min2, ts.frontier_agents) == (t_min, t_min2, frontier)


def test_individual_neighbors_at_start():
    inst = four_cycle(1, 2)
    s = JointState.initial(inst.starts)
    assert individual_neighbors(s, 0, inst) == [Envelope(b, a, 1, 0), Envelope(c, a, 1, 0), Envelope(a, a, 1, 0)]


def _after_first_step():
    # agent 0 reached b at 1, agent 1 is still moving d -> c until 2
    return JointState((Envelope(b, a, 1, 0), Envelope(c, d, 2, 0)), (0, 0))


def test_non_frontier_agent_keeps_its_envelope():
    inst = four_cycle(1, 2)
    s = _after_first_step()
    assert individual_neighbors(s, 1, inst) == [s.envs[1]]
    opts = individual_neighbors(s, 0, inst)
    assert opts == [Envelope(a, b, 2, 1), Envelope(d, b, 2, 1), Envelope(b, b, 2, 1)]


def test_get_ngh_counts():
    inst = four_cycle(1, 2)
    assert len(get_ngh(JointState.initial(inst.starts), inst)) == 9
    kids = get_ngh(_after_first_step(), inst)
    assert len(kids) == 3
    assert all(k.envs[1] == Envelope(c, d, 2, 0) for k in kids)


def test_event_wait_ends_at_co_actor_arrival():
    # agent 0 waits while agent 1 moves with duration 2: the wait ends at 2, not 1
    inst = four_cycle(1, 2)
    kids = get_ngh(JointState.initial(inst.starts), inst)
    waits = [k for k in kids if k.envs[0].p == k.envs[0].v and k.envs[1].p != k.envs[1].v]
    assert waits and all(k.envs[0].t == 2 for k in waits)
    fixed = get_ngh(JointState.initial(inst.starts), inst, wait_rule="fixed")
    assert {k.envs[0].t for k in fixed if k.envs[0].p == k.envs[0].v} == {1}


def test_compare_empty_and_strict():
    f = FrontierSet()
    assert compare(at(1, 2), f)
    assert not compare(at(2, 3), f)
    assert compare(at(1, 3), f)


def test_compare_weak_regime_literal_rule():
    f = FrontierSet("timestamp")
    assert compare(at(1, 2), f)
    assert compare(at(1, 3), f)  # no synchronized state yet: strict comparison
    f2 = FrontierSet("timestamp")
    assert compare(at(5, 5), f2)
    assert compare(at(1, 2), f2)
    assert f2.synchronized_seen((0, 1))
    assert not compare(at(1, 3), f2)


def test_compare_weak_regime_needs_synchronized_blocker():
    f = FrontierSet()
    compare(at(5, 5), f)
    compare(at(1, 2), f)
    assert compare(at(1, 3), f)
    g = FrontierSet()
    compare(at(2, 2), g)
    assert not compare(at(2, 3), g)


def test_compare_rejects_duplicates():
    f = FrontierSet()
    assert compare(at(1, 2), f)
    assert not compare(at(1, 2), f)


def test_banked_goal_time_blocks_dominance():
    # r is earlier but has charged more time to agent 0 than s
    r = JointState((Envelope(0, 0, 1, 0), Envelope(1, 1, 1, 0)), (0, 0))
    s = JointState((Envelope(0, 0, 3, 2), Envelope(1, 1, 4, 0)), (3, 0))
    f = FrontierSet()
    compare(r, f)
    assert compare(s, f)
    literal = FrontierSet("timestamp")
    compare(r, literal)
    assert not compare(s, literal)


def test_heuristic_table():
    inst = four_cycle(1, 2)
    h = heuristic_table(inst)
    assert h[0][a] == 2
    assert h[0][d] == 0 and h[1][a] == 0
    assert sum(h[i][v] for i, v in enumerate(inst.starts)) == 6 <= 7


@pytest.mark.parametrize("d1,d2,cost", [(1, 1, 4), (1, 2, 7)])
def test_search_four_cycle(d1, d2, cost):
    sol = search(four_cycle(d1, d2))
    assert sol.stats.outcome == SOLVED
    assert sol.cost == cost
    assert validate(sol, four_cycle(d1, d2)).ok


def test_opposing_line_fails():
    sol = search(line())
    assert sol.stats.outcome == FAILURE and sol.cost is None and sol.paths == []


def test_single_agent_line():
    sol = search(line((2,), ((0, 2),)))
    assert sol.cost == 4


def test_unreachable_goal_fails_before_search():
    g = Graph.from_edges(3, [(0, 1)])
    inst = Instance(g, DurationTable.uniform([1]), (0,), (2,))
    sol = search(inst)
    assert sol.stats.outcome == FAILURE
    assert sol.stats.expanded == 0


def test_expansion_limit():
    grid = empty_grid(4, 4)
    inst = grid_instance(grid, random_pairs(grid[0], 3, 5), gen_uniform_durations(3, 3, 6))
    sol = search(inst, SearchParams(expansion_limit=1))
    assert sol.stats.outcome == LIMIT and sol.cost is None


def test_bad_params():
    with pytest.raises(ValueError):
        SearchParams(weight=0.5)
    with pytest.raises(ValueError):
        SearchParams(dominance="loose")


def test_reconstruct_four_cycle():
    inst = four_cycle(1, 1)
    sol = search(inst)
    p = sol.paths[0]
    assert [(w.v, w.arrive) for w in p.waypoints] == [(a, 0), (b, 1), (d, 2)]
    assert solution_cost(sol, inst) == sol.cost


def test_reconstruct_trivial():
    inst = Instance(Graph.from_edges(2, [(0, 1)]), DurationTable.uniform([1, 1]), (0, 1), (0, 1))
    sol = search(inst)
    assert sol.cost == 0
    assert [len(p.waypoints) for p in sol.paths] == [1, 1]
    assert reconstruct(JointState.initial((0, 1))).cost == 0


def test_stats_are_consistent():
    sol = search(four_cycle(1, 2))
    st_ = sol.stats
    assert st_.pruned <= st_.generated and st_.expanded <= st_.generated


def _reachable(inst, depth, seed):
    """States along random conflict-free child walks."""
    import random

    rng = random.Random(seed)
    out = []
    s = JointState.initial(inst.starts)
    for _ in range(depth):
        kids = [k for k in get_ngh(s, inst) if not has_conflict(k.envs)]
        if not kids:
            break
        s = rng.choice(kids)
        out.append(s)
    return out


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_synchronized_state_reaches_every_adjacent_joint_vertex(seed, k):
    grid = empty_grid(3, 3)
    inst = grid_instance(grid, random_pairs(grid[0], 2, seed), gen_uniform_durations(2, k, seed))
    for s in [JointState.initial(inst.starts)] + _reachable(inst, 8, seed):
        if not is_synchronized(s):
            continue
        got = {kid.vertex for kid in get_ngh(s, inst)}
        nbrs = [(v,) + tuple(inst.graph.adjacency[v]) for v in s.vertex]
        assert got == set(itertools.product(*nbrs))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_fixed_wait_quantum(seed, k):
    grid = empty_grid(3, 3)
    inst = grid_instance(grid, random_pairs(grid[0], 3, seed), gen_uniform_durations(3, k, seed))
    dmin = inst.min_duration()
    for s in _reachable(inst, 8, seed):
        ts = timing_summary(s)
        allowed = {ts.t_min2 - ts.t_min if ts.t_min2 is not None else dmin}
        for kid in get_ngh(s, inst, wait_rule="fixed"):
            for i in ts.frontier_agents:
                e = kid.envs[i]
                if e.p == e.v:
                    assert e.t - e.tp in allowed


class Recording(LSSearch):
    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.kept = []

    def on_keep(self, parent, child):
        self.kept.append(child)


@pytest.mark.parametrize("seed", range(6))
def test_tmin_increases_along_chains(seed):
    grid = empty_grid(3, 3)
    inst = grid_instance(grid, random_pairs(grid[0], 3, seed), gen_uniform_durations(3, 3, seed))
    run = Recording(inst)
    run.run()
    for s in run.kept:
        assert min(s.times) > min(s.parent.times)
