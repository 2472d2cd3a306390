"""Command-line entry point: solve, bench, validate and oracle subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import (
    ALGORITHMS,
    ConfigError,
    ExperimentConfig,
    build_instance,
    records_to_csv,
    records_to_json,
    run_algorithm,
    run_suite,
    write_records,
)
from .graph import InstanceError, load_instance
from .naive import TickError
from .solution import FAILURE, HORIZON, LIMIT, SOLVED, TIMEOUT, Solution
from .validate import OracleError, brute_force_oracle, solution_cost, validate

EXIT_OK = 0
EXIT_NO_SOLUTION = 1
EXIT_LIMIT = 2
EXIT_USAGE = 64

OUTCOME_EXIT = {SOLVED: EXIT_OK, FAILURE: EXIT_NO_SOLUTION, HORIZON: EXIT_NO_SOLUTION, TIMEOUT: EXIT_LIMIT, LIMIT: EXIT_LIMIT}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """argparse reports usage errors with exit status 64 and a one-line reason."""

    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> tuple[int, int]:
    try:
        h, w = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}") from None
    if h < 1 or w < 1:
        raise argparse.ArgumentTypeError("grid sides must be positive")
    return h, w


def _source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="instance JSON file")
    p.add_argument("--map", help="grid map file (movingai format)")
    p.add_argument("--scen", help="scenario file for --map")
    p.add_argument("--grid", type=_grid, help="empty grid HxW instead of a map")
    p.add_argument("--agents", type=int, default=None, help="number of agents")
    p.add_argument("--k", type=int, default=None, help="draw per-agent durations from [1, K]")
    p.add_argument("--seed", type=int, default=0)


def _limit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=int, default=None, help="common time unit (default: gcd of durations)")
    p.add_argument("--horizon", type=int, default=None, help="horizon in ticks")


def make_parser() -> Parser:
    parser = Parser(prog="mapfaa", description="Multi-agent path finding with asynchronous actions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("solve", help="solve one instance and print the solution JSON")
    _source_args(p)
    _limit_args(p)
    p.add_argument("--algo", choices=[a for a in ALGORITHMS if a != "oracle"], default="lsa")
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--time-limit", type=float, default=None, help="seconds")
    p.add_argument("--out", help="write the solution here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("bench", help="run a sweep and write CSV or JSON records")
    p.add_argument("--config", help="JSON experiment config; flags below override it")
    _source_args(p)
    _limit_args(p)
    p.add_argument("--algo", action="append", choices=ALGORITHMS, help="repeatable")
    p.add_argument("--weight", type=float, action="append", help="repeatable")
    p.add_argument("--seeds", type=int, default=None, help="run seeds 0..N-1")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per run")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", help="output file (default: $MAPFAA_OUT_DIR/results.<format>)")
    p.add_argument("--format", choices=["json", "csv"], default="csv")

    p = sub.add_parser("validate", help="check a solution JSON against an instance")
    p.add_argument("solution", help="solution JSON file")
    _source_args(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("oracle", help="exact optimal cost by exhaustive search (small instances)")
    _source_args(p)
    _limit_args(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    return parser


def _instance(args):
    sources = [x for x in (args.instance, args.map, args.grid) if x is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --instance, --map or --grid")
    if args.scen and not args.map:
        raise UsageError("--scen needs --map")
    for path in (args.instance, args.map, args.scen):
        if path is not None and not Path(path).is_file():
            raise UsageError(f"no such file: {path}")
    return build_instance(
        map_path=args.map, scen_path=args.scen, instance_path=args.instance, grid=args.grid,
        agents=args.agents, k=args.k, seed=args.seed,
    )


def _emit(text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_solve(args) -> int:
    inst = _instance(args)
    sol = run_algorithm(inst, args.algo, args.weight, args.time_limit, None, args.tau, args.horizon)
    if args.format == "json":
        text = sol.to_json()
    else:
        st = sol.stats
        text = "algorithm,outcome,cost,expanded,generated,pruned,runtime_s\n"
        text += f"{sol.algorithm},{st.outcome},{'' if sol.cost is None else sol.cost},"
        text += f"{st.expanded},{st.generated},{st.pruned},{st.runtime_s:.3f}\n"
    _emit(text, args.out)
    return OUTCOME_EXIT.get(sol.stats.outcome, EXIT_NO_SOLUTION)


def cmd_bench(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    overrides = {
        "map": args.map, "scen": args.scen, "instance": args.instance,
        "grid": list(args.grid) if args.grid else None,
        "agents": [args.agents] if args.agents else None, "ks": [args.k] if args.k else None,
        "weights": args.weight, "algorithms": args.algo,
        "seeds": list(range(args.seeds)) if args.seeds else None,
        "time_limit": args.time_limit, "tau": args.tau, "horizon": args.horizon,
        "out": args.out, "jobs": args.jobs,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    data.setdefault("algorithms", ["lsa"])
    config = ExperimentConfig.from_dict(data)
    records = run_suite(config)
    path = write_records(records, config.out, args.format)
    logging.getLogger(__name__).info("wrote %d records to %s", len(records), path)
    if not config.out:
        _emit(records_to_csv(records) if args.format == "csv" else records_to_json(records))
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = _instance(args)
    sol = Solution.from_json(Path(args.solution).read_text())
    report = validate(sol, inst)
    result = {
        "ok": report.ok,
        "cost": solution_cost(sol, inst) if not report.errors else None,
        "errors": report.errors,
        "conflicts": [
            {"agents": list(pair), "vertex": v, "from": span.lo, "to": span.hi} for pair, v, span in report.conflicts
        ],
    }
    _emit(json.dumps(result, indent=2))
    return EXIT_OK if report.ok else EXIT_NO_SOLUTION


def cmd_oracle(args) -> int:
    inst = _instance(args)
    tau = args.tau
    horizon = None
    if args.horizon is not None:
        from .naive import common_unit

        horizon = args.horizon * (tau if tau is not None else common_unit(inst))
    try:
        cost = brute_force_oracle(inst, horizon=horizon, tau=tau)
    except OracleError as exc:
        _emit(json.dumps({"cost": None, "outcome": LIMIT, "reason": str(exc)}))
        return EXIT_LIMIT
    outcome = SOLVED if cost is not None else (HORIZON if horizon is not None else FAILURE)
    _emit(json.dumps({"cost": cost, "outcome": outcome, "time_scale": inst.time_scale}))
    return EXIT_OK if cost is not None else EXIT_NO_SOLUTION


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "validate": cmd_validate, "oracle": cmd_oracle}


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, InstanceError, TickError, ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"mapfaa {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
