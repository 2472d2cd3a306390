"""Instance assembly and deterministic experiment sweeps with CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from statistics import mean

from .graph import (
    Instance,
    empty_grid,
    gen_uniform_durations,
    grid_instance,
    load_instance,
    load_map,
    load_scenario,
    random_pairs,
)
from .lss import SearchParams, search
from .mstar import search_lsm, search_lsrm
from .naive import common_unit, naive_search
from .solution import FAILURE, LIMIT, SOLVED, SearchStats, Solution
from .validate import OracleError, brute_force_oracle

log = logging.getLogger(__name__)

ALGORITHMS = ("lsa", "lsm", "lsrm", "naive", "oracle")
OUT_DIR_ENV = "MAPFAA_OUT_DIR"

# pinned column order of the CSV output
COLUMNS = (
    "map",
    "agents",
    "k",
    "seed",
    "algorithm",
    "weight",
    "outcome",
    "cost",
    "expanded",
    "generated",
    "pruned",
    "runtime_s",
)


class ConfigError(ValueError):
    pass


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "."))


@dataclass
class ExperimentConfig:
    algorithms: list[str]
    map: str | None = None
    scen: str | None = None
    instance: str | None = None
    grid: tuple[int, int] | None = None
    agents: list[int] = field(default_factory=lambda: [2])
    ks: list[int] = field(default_factory=list)
    weights: list[float] = field(default_factory=lambda: [1.0])
    seeds: list[int] = field(default_factory=lambda: [0])
    time_limit: float | None = None
    expansion_limit: int | None = None
    tau: int | None = None
    horizon: int | None = None
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {list(ALGORITHMS)}")
        sources = [x for x in (self.map, self.instance, self.grid) if x is not None]
        if len(sources) != 1:
            raise ConfigError("give exactly one of map, instance or grid")
        if self.scen is not None and self.map is None:
            raise ConfigError("a scenario needs a map")
        for path in (self.map, self.scen, self.instance):
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"no such file: {path}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ConfigError("time limit must be positive")
        if self.expansion_limit is not None and self.expansion_limit <= 0:
            raise ConfigError("expansion limit must be positive")
        if any(n < 1 for n in self.agents) or any(k < 1 for k in self.ks):
            raise ConfigError("agent counts and K values must be positive")
        if any(w < 1 for w in self.weights):
            raise ConfigError("weights must be >= 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        data = dict(data)
        if isinstance(data.get("algorithms"), str):
            data["algorithms"] = [data["algorithms"]]
        if data.get("grid") is not None:
            data["grid"] = tuple(data["grid"])
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    @property
    def map_label(self) -> str:
        if self.map is not None:
            return Path(self.map).stem
        if self.instance is not None:
            return Path(self.instance).stem
        return f"empty-{self.grid[0]}x{self.grid[1]}"


@dataclass
class RunRecord:
    map: str
    agents: int
    k: int | None
    seed: int
    algorithm: str
    weight: float
    outcome: str
    cost: int | None
    expanded: int
    generated: int
    pruned: int
    runtime_s: float

    def __post_init__(self):
        if (self.cost is not None) != (self.outcome == SOLVED):
            raise ValueError("cost must be present exactly when the run is solved")


def build_instance(
    *,
    map_path: str | None = None,
    scen_path: str | None = None,
    instance_path: str | None = None,
    grid: tuple[int, int] | None = None,
    agents: int | None = None,
    k: int | None = None,
    seed: int = 0,
) -> Instance:
    """Assemble one instance from a JSON file, a map (+ scenario) or an empty grid.

    With ``k`` the per-agent durations are redrawn from [1, k] using ``seed``.
    Start/goal pairs come from the scenario when given, otherwise from ``seed``.
    """
    if instance_path is not None:
        inst = load_instance(Path(instance_path).read_text())
        if k is not None:
            inst = inst.with_durations(gen_uniform_durations(inst.agent_count, k, seed))
        return inst
    if map_path is not None:
        graph, gmap = load_map(Path(map_path).read_text())
        name = Path(map_path).stem
    elif grid is not None:
        graph, gmap = empty_grid(*grid)
        name = f"empty-{grid[0]}x{grid[1]}"
    else:
        raise ConfigError("no instance source given")
    n = agents or 2
    if scen_path is not None:
        pairs = load_scenario(Path(scen_path).read_text(), n, gmap)
    else:
        pairs = random_pairs(graph, n, seed)
    durations = gen_uniform_durations(n, k if k is not None else 1, seed)
    return grid_instance((graph, gmap), pairs, durations, name=f"{name}-n{n}-k{k}-s{seed}")


def run_algorithm(
    instance: Instance,
    algorithm: str,
    weight: float = 1.0,
    time_limit: float | None = None,
    expansion_limit: int | None = None,
    tau: int | None = None,
    horizon: int | None = None,
) -> Solution:
    params = SearchParams(weight=weight, time_limit=time_limit, expansion_limit=expansion_limit)
    if algorithm == "lsa":
        return search(instance, params)
    if algorithm == "lsm":
        return search_lsm(instance, params)
    if algorithm == "lsrm":
        return search_lsrm(instance, params)
    if algorithm == "naive":
        return naive_search(instance, tau, horizon, params)
    if algorithm == "oracle":
        return oracle_solution(instance, tau, horizon)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def oracle_solution(instance: Instance, tau: int | None = None, horizon: int | None = None) -> Solution:
    """Wrap the oracle's cost in a path-less Solution so it fits the suite.

    ``horizon`` is in ticks, as for the naive search.
    """
    start = time.perf_counter()
    try:
        tick = tau if tau is not None else common_unit(instance)
        cost = brute_force_oracle(instance, horizon=None if horizon is None else horizon * tick, tau=tau)
        outcome = SOLVED if cost is not None else FAILURE
    except OracleError as exc:
        log.warning("oracle gave up on %s: %s", instance.name, exc)
        cost, outcome = None, LIMIT
    stats = SearchStats(outcome=outcome, runtime_s=time.perf_counter() - start)
    return Solution("oracle", cost, [], stats, instance.time_scale)


def _jobs(config: ExperimentConfig) -> list[tuple]:
    ks = config.ks or [None]
    out = []
    for n in config.agents:
        for k in ks:
            for seed in config.seeds:
                for algo in config.algorithms:
                    # the oracle and unweighted runs do not depend on w
                    weights = [1.0] if algo == "oracle" else config.weights
                    for w in weights:
                        out.append((n, k, seed, algo, w))
    return out


def _run_one(args) -> RunRecord:
    config, job = args
    try:
        return _run(config, job)
    except Exception:
        # a broken run is recorded and the sweep goes on
        log.exception("run %s failed", job)
        n, k, seed, algo, w = job
        return RunRecord(config.map_label, n, k, seed, algo, w, "error", None, 0, 0, 0, 0.0)


def _run(config: ExperimentConfig, job) -> RunRecord:
    n, k, seed, algo, w = job
    inst = build_instance(
        map_path=config.map, scen_path=config.scen, instance_path=config.instance, grid=config.grid,
        agents=n, k=k, seed=seed,
    )
    sol = run_algorithm(inst, algo, w, config.time_limit, config.expansion_limit, config.tau, config.horizon)
    st = sol.stats
    return RunRecord(
        config.map_label, inst.agent_count, k, seed, algo, w, st.outcome,
        sol.cost if st.outcome == SOLVED else None, st.expanded, st.generated, st.pruned, st.runtime_s,
    )


def run_suite(config: ExperimentConfig) -> list[RunRecord]:
    """Sweep agents x K x seed x algorithm x weight; records come back in sweep order."""
    jobs = [(config, j) for j in _jobs(config)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(job) for job in jobs]


def aggregate(records: list[RunRecord]) -> list[dict]:
    """Per (map, agents, k, algorithm, weight) cell: success rate, mean runtime and
    mean expansions, both averaged over all runs, solved or not."""
    cells: dict[tuple, list[RunRecord]] = {}
    for r in records:
        cells.setdefault((r.map, r.agents, r.k, r.algorithm, r.weight), []).append(r)
    out = []
    for (m, n, k, algo, w), rs in cells.items():
        out.append({
            "map": m, "agents": n, "k": k, "algorithm": algo, "weight": w, "runs": len(rs),
            "success_rate": sum(r.outcome == SOLVED for r in rs) / len(rs),
            "mean_runtime_s": mean(r.runtime_s for r in rs),
            "mean_expanded": mean(r.expanded for r in rs),
        })
    return out


def _row(r: RunRecord, include_runtime: bool) -> list:
    d = asdict(r)
    d["runtime_s"] = f"{r.runtime_s:.3f}" if include_runtime else ""
    return ["" if d[c] is None else d[c] for c in COLUMNS]


def records_to_csv(records: list[RunRecord], include_runtime: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        writer.writerow(_row(r, include_runtime))
    return buf.getvalue()


def records_to_json(records: list[RunRecord], include_runtime: bool = True) -> str:
    rows = []
    for r in records:
        d = asdict(r)
        if include_runtime:
            d["runtime_s"] = round(r.runtime_s, 3)
        else:
            d.pop("runtime_s")
        rows.append(d)
    return json.dumps({"records": rows, "summary": aggregate(records)}, indent=2)


def write_records(records: list[RunRecord], out: str | Path | None, fmt: str = "csv") -> Path:
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records)
    path = Path(out) if out else default_out_dir() / f"results.{fmt}"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
