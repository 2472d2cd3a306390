import pytest

from mapfaa.fixtures import four_cycle, line
from mapfaa.graph import DurationTable, empty_grid, gen_uniform_durations, grid_instance, random_pairs
from mapfaa.lss import search
from mapfaa.naive import TickError, TickModel, common_unit, default_horizon, naive_search
from mapfaa.solution import HORIZON, SOLVED
from mapfaa.validate import validate


@pytest.mark.parametrize("durations,tau", [([2, 3], 1), ([10], 10), ([4, 6], 2)])
def test_common_unit(durations, tau):
    assert common_unit(durations) == tau
    assert common_unit(DurationTable.uniform(durations)) == tau


def test_common_unit_rejects_empty():
    with pytest.raises(TickError):
        common_unit([])
    with pytest.raises(TickError):
        common_unit([0, 2])


def test_tick_model():
    inst = line((4,), ((0, 2),))
    model = TickModel.build(inst)
    assert model.tau == 4
    assert model.horizon == default_horizon(inst, 4)
    with pytest.raises(TickError):
        TickModel.build(inst, tau=3)


@pytest.mark.parametrize("d1,d2,cost", [(1, 1, 4), (1, 2, 7)])
def test_four_cycle_matches_search(d1, d2, cost):
    inst = four_cycle(d1, d2)
    sol = naive_search(inst, tau=1)
    assert sol.cost == cost == search(inst).cost
    assert validate(sol, inst).ok
    assert sol.stats.extra["tau"] == 1


def test_finer_lattice_costs_more_expansions():
    inst = line((2,), ((0, 2),))
    coarse = naive_search(inst, tau=2)
    fine = naive_search(inst, tau=1)
    assert coarse.cost == fine.cost == 4
    assert fine.stats.expanded > coarse.stats.expanded


def test_opposing_line_hits_horizon():
    sol = naive_search(line(), horizon=30)
    assert sol.stats.outcome == HORIZON and sol.cost is None
    assert sol.stats.extra["horizon"] == 30


@pytest.mark.parametrize("seed", range(10))
def test_cost_matches_search_on_grids(seed):
    grid = empty_grid(3, 3)
    inst = grid_instance(grid, random_pairs(grid[0], 2, seed), gen_uniform_durations(2, 3, seed))
    sol = naive_search(inst)
    assert sol.stats.outcome == SOLVED
    assert sol.cost == search(inst).cost
    assert validate(sol, inst).ok
