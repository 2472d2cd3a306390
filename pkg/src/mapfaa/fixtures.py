"""Small named instances used by tests, docs and the CLI examples."""

from __future__ import annotations

from .graph import DurationTable, Graph, Instance, empty_grid, gen_uniform_durations, grid_instance, random_pairs

# a - b
# |   |
# c - d
CYCLE_LABELS = ("a", "b", "c", "d")


def four_cycle(d1: int = 1, d2: int = 1) -> Instance:
    """Agent 0 goes a -> d with duration d1, agent 1 goes d -> a with duration d2."""
    a, b, c, d = range(4)
    graph = Graph.from_edges(4, [(a, b), (b, d), (d, c), (c, a)], labels=CYCLE_LABELS)
    return Instance(graph, DurationTable.uniform([d1, d2]), (a, d), (d, a), name=f"fcyc-{d1}-{d2}")


def line(durations=(1, 1), agents=((0, 2), (2, 0))) -> Instance:
    """Path A - B - C with the given agents (default: two agents swapping ends)."""
    graph = Graph.from_edges(3, [(0, 1), (1, 2)], labels=("A", "B", "C"))
    return Instance(
        graph,
        DurationTable.uniform(list(durations)),
        tuple(s for s, _ in agents),
        tuple(g for _, g in agents),
        name="fline",
    )


def small_suite(seeds_per_cell: int = 17, base_seed: int = 2024) -> list[Instance]:
    """Seeded desk-scale instances: 3x3 and 4x4 empty grids, 2 or 3 agents,
    per-agent durations drawn from [1, K] for K in 1..3, plus the cycle and line
    fixtures.
    """
    out = []
    for size in (3, 4):
        grid = empty_grid(size, size)
        for n in (2, 3):
            for k in (1, 2, 3):
                for s in range(seeds_per_cell):
                    seed = base_seed + 1000 * size + 100 * n + 10 * k + s * 7919
                    out.append(
                        grid_instance(
                            grid,
                            random_pairs(grid[0], n, seed),
                            gen_uniform_durations(n, k, seed + 1),
                            name=f"grid{size}-n{n}-k{k}-s{s}",
                        )
                    )
    for d1 in (1, 2, 3):
        for d2 in (1, 2, 3):
            out.append(four_cycle(d1, d2))
    for durations in ((1, 1), (1, 2), (2, 3)):
        out.append(line(durations))
    out.append(line((1, 2), ((0, 1), (2, 2))))
    return out
