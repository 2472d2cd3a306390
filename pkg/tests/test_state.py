import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapfaa.state import (
    Envelope,
    JointState,
    check_envelope,
    conflict_set,
    has_conflict,
    is_synchronized,
    occupancy,
    strictly_dominates,
    weakly_dominates,
)

A, B, C, D = range(4)


def at(*times, v=None):
    """Joint state with the given timestamps, every agent waiting at its own vertex."""
    v = v or tuple(range(len(times)))
    return JointState(tuple(Envelope(x, x, t, 0) for x, t in zip(v, times)), (0,) * len(times))


def test_occupancy_of_a_move():
    move = Envelope(B, A, 2, 0)
    assert occupancy(move, 1) == {A, B}
    assert occupancy(move, 2) == {B}
    assert occupancy(move, 0) == {A}
    with pytest.raises(ValueError):
        occupancy(move, 3)


def test_occupancy_of_a_wait():
    assert occupancy(Envelope(C, C, 5, 1), 3) == {C}


def test_swap_conflict():
    report = conflict_set([Envelope(B, A, 2, 0), Envelope(A, B, 3, 0)])
    assert report.agents == {0, 1}
    assert report.pairs() == [(0, 1)]


def test_arrival_meets_departure():
    report = conflict_set([Envelope(B, A, 2, 0), Envelope(C, B, 5, 2)])
    assert report.agents == {0, 1}
    (pair, vertex, (lo, hi, _)), = report.witnesses
    assert (vertex, lo, hi) == (B, 2, 2)


def test_disjoint_moves_on_cycle():
    # a=0 -> b=1 and d=3 -> c=2 on the four-cycle
    assert not conflict_set([Envelope(1, 0, 1, 0), Envelope(2, 3, 1, 0)])


def test_conflict_set_accepts_states():
    s = JointState((Envelope(B, A, 2, 0), Envelope(A, B, 3, 0)), (0, 0))
    assert conflict_set(s).agents == {0, 1}


def test_check_envelope():
    check_envelope(Envelope(A, A, 0, 0))
    with pytest.raises(ValueError):
        check_envelope(Envelope(B, A, 1, 2))
    with pytest.raises(ValueError):
        check_envelope(Envelope(B, A, 2, 2))
    with pytest.raises(ValueError):
        check_envelope(Envelope(B, A, 3, 0), duration=lambda u, v: 2)


@pytest.mark.parametrize(
    "t1,t2,strict,weak",
    [((2, 3), (3, 4), True, True), ((2, 3), (2, 4), False, True), ((2, 3), (3, 2), False, False),
     ((2, 3), (2, 3), False, True), ((2, 3), (1, 4), False, False)],
)
def test_dominance_examples(t1, t2, strict, weak):
    assert strictly_dominates(at(*t1), at(*t2)) is strict
    assert weakly_dominates(at(*t1), at(*t2)) is weak


def test_dominance_needs_same_vertex():
    with pytest.raises(ValueError):
        strictly_dominates(at(1, 2), at(1, 2, v=(1, 0)))


def test_synchronized():
    assert is_synchronized(JointState.initial([0, 1, 2]))
    assert is_synchronized(at(2, 2, 2))
    assert not is_synchronized(at(2, 3))


times = st.lists(st.integers(0, 6), min_size=3, max_size=3)


@settings(max_examples=200, deadline=None)
@given(times, times, times)
def test_dominance_order_properties(x, y, z):
    a, b, c = at(*x), at(*y), at(*z)
    if strictly_dominates(a, b):
        assert weakly_dominates(a, b)
    assert not strictly_dominates(a, a)
    assert weakly_dominates(a, a)
    if strictly_dominates(a, b) and strictly_dominates(b, c):
        assert strictly_dominates(a, c)
    if weakly_dominates(a, b) and weakly_dominates(b, c):
        assert weakly_dominates(a, c)


@st.composite
def envelopes(draw, n_vertices=4):
    p = draw(st.integers(0, n_vertices - 1))
    v = draw(st.integers(0, n_vertices - 1))
    tp = draw(st.integers(0, 6))
    dt = draw(st.integers(0 if p == v else 1, 5))
    return Envelope(v, p, tp + dt, tp)


@settings(max_examples=300, deadline=None)
@given(envelopes(), st.data())
def test_occupancy_within_endpoints(env, data):
    t = data.draw(st.integers(env.tp, env.t))
    occ = occupancy(env, t)
    assert occ <= {env.p, env.v}
    interior = env.p != env.v and env.tp < t < env.t
    assert (occ == {env.p, env.v} and env.p != env.v) == interior


@settings(max_examples=200, deadline=None)
@given(st.lists(envelopes(), min_size=2, max_size=4), st.randoms(use_true_random=False))
def test_conflicts_invariant_under_relabeling(envs, rnd):
    order = list(range(len(envs)))
    rnd.shuffle(order)
    base = conflict_set(envs)
    permuted = conflict_set([envs[i] for i in order])
    assert {order[i] for i in permuted.agents} == set(base.agents)
    assert has_conflict(envs) == bool(base)
    rev = conflict_set(list(reversed(envs)))
    assert {len(envs) - 1 - i for i in rev.agents} == set(base.agents)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 5), st.integers(1, 4), st.integers(0, 5), st.integers(1, 4))
def test_swap_always_detected(t1, d1, t2, d2):
    a = Envelope(B, A, t1 + d1, t1)
    b = Envelope(A, B, t2 + d2, t2)
    if max(t1, t2) < min(t1 + d1, t2 + d2):
        assert conflict_set([a, b]).agents == {0, 1}


def test_pairwise_witnesses_cover_all_pairs():
    envs = [Envelope(A, A, 4, 0)] * 3
    assert conflict_set(envs).pairs() == list(itertools.combinations(range(3), 2))
