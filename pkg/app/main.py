"""
Command-line entry point: generate scenarios, run them, sweep benchmarks,
render traces and list archived bench rows.

Exit codes: 0 success, 1 usage, 2 validation, 3 runtime failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from tabulate import tabulate

from .archive import archive_rows, fetch_runs
from .assignment import STRATEGIES
from .bench import (
    PRESETS,
    BenchSettings,
    grid_configs,
    markdown_table,
    row_from_result,
    run_bench,
    write_csv,
)
from .config import BENCH_WORKERS, CBS_NODE_BUDGET, LOG_LEVEL, SVG_CELL_PX
from .errors import PlannerError, UsageError
from .render import render_trace
from .scenario import generate_random_scenario, load_scenario, save_scenario
from .sim import RunOptions, run
from .trace import read_trace, write_trace

logger = logging.getLogger(__name__)


class PlannerArgumentParser(argparse.ArgumentParser):
    """Reports bad flags as UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _float_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = PlannerArgumentParser(prog="drone-planner", description="Multi-drone filming planner")
    sub = parser.add_subparsers(dest="command", parser_class=PlannerArgumentParser)

    gen = sub.add_parser("gen", help="generate a random scenario file")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--size", type=int, default=20, help="map width and height in cells")
    gen.add_argument("--density", type=float, default=0.10, help="obstacle fraction, 0..0.5")
    gen.add_argument("--actors", type=int, default=3)
    gen.add_argument("--agents", type=int, default=3)
    gen.add_argument("--length", type=int, default=30, help="executed timesteps")
    gen.add_argument("--horizon", type=int, default=5)
    gen.add_argument("--execute-steps", type=int, default=1)
    gen.add_argument("--hysteresis", type=float, default=0.0)
    gen.add_argument("--out", type=Path, required=True)

    run_cmd = sub.add_parser("run", help="simulate a scenario")
    run_cmd.add_argument("scenario", type=Path)
    run_cmd.add_argument("--trace-out", type=Path, default=Path("trace.jsonl"))
    run_cmd.add_argument("--metrics-out", type=Path, default=Path("metrics.json"))
    _add_run_flags(run_cmd)

    bench = sub.add_parser("bench", help="benchmark sweep, one CSV row per (config, seed)")
    bench.add_argument("--agents", type=_int_list, help="e.g. 2,3,5")
    bench.add_argument("--actors", type=_int_list)
    bench.add_argument("--densities", type=_float_list, help="obstacle density in percent, e.g. 5,10,15")
    bench.add_argument("--preset", choices=sorted(PRESETS))
    bench.add_argument("--seeds", type=int, default=3)
    bench.add_argument("--base-seed", type=int, default=0)
    bench.add_argument("--size", type=int, default=20)
    bench.add_argument("--length", type=int, default=30)
    bench.add_argument("--out", type=Path, default=Path("bench.csv"))
    bench.add_argument("--markdown", action="store_true", help="also print a markdown table")
    bench.add_argument("--workers", type=int, default=BENCH_WORKERS)
    bench.add_argument("--db", help="archive rows to this database URL")
    _add_run_flags(bench)

    render = sub.add_parser("render", help="write one SVG frame per timestep of a trace")
    render.add_argument("trace", type=Path)
    render.add_argument("--out-dir", type=Path, default=Path("frames"))
    render.add_argument("--cell-px", type=int, default=SVG_CELL_PX)

    runs = sub.add_parser("runs", help="list archived bench rows")
    runs.add_argument("--db", help="database URL (DATABASE_URL by default)")
    runs.add_argument("--limit", type=int, default=50)
    return parser


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--strategy", choices=STRATEGIES, default="optimal")
    parser.add_argument("--budget", type=int, default=CBS_NODE_BUDGET, help="CBS node budget per epoch")
    parser.add_argument("--no-timing", action="store_true", help="zero wall-clock fields for byte-stable output")


def cmd_gen(args) -> int:
    cfg = generate_random_scenario(
        seed=args.seed,
        width=args.size,
        height=args.size,
        density=args.density,
        n_actors=args.actors,
        m_agents=args.agents,
        run_length=args.length,
        horizon_steps=args.horizon,
        execute_steps=args.execute_steps,
        hysteresis=args.hysteresis,
    )
    save_scenario(cfg, args.out)
    print(json.dumps({
        "seed": cfg.seed,
        "width": cfg.map.width,
        "height": cfg.map.height,
        "obstacles": len(cfg.map.obstacles),
        "actors": len(cfg.actors),
        "agents": len(cfg.agents),
        "run_length": cfg.run_length,
        "horizon_steps": cfg.horizon_steps,
        "execute_steps": cfg.execute_steps,
        "hysteresis": cfg.hysteresis,
        "out": str(args.out),
    }, sort_keys=True))
    return 0


def cmd_run(args) -> int:
    cfg = load_scenario(args.scenario)
    options = RunOptions(strategy=args.strategy, budget=args.budget, record_timing=not args.no_timing)
    result = run(cfg, options)
    write_trace(result.records(), args.trace_out)
    args.metrics_out.write_text(json.dumps(result.metrics.to_dict(), indent=2, sort_keys=True) + "\n")
    logger.info(f"Metrics written to {args.metrics_out}")
    print(markdown_table([row_from_result(cfg, result)]))
    return 0


def cmd_bench(args) -> int:
    if args.preset:
        if args.agents or args.actors or args.densities:
            raise UsageError("--preset cannot be combined with --agents/--actors/--densities")
        configs = list(PRESETS[args.preset])
    else:
        if not (args.agents and args.actors and args.densities):
            raise UsageError("bench needs --agents, --actors and --densities (or --preset)")
        configs = grid_configs(args.agents, args.actors, args.densities)
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")

    settings = BenchSettings(
        size=args.size,
        length=args.length,
        seeds=args.seeds,
        base_seed=args.base_seed,
        strategy=args.strategy,
        record_timing=not args.no_timing,
        budget=args.budget,
    )
    rows = run_bench(configs, settings, workers=max(1, args.workers))
    write_csv(rows, args.out)
    if args.markdown:
        print(markdown_table(rows))
    if args.db:
        archive_rows(rows, args.strategy, args.db)
    return 0


def cmd_render(args) -> int:
    events = read_trace(args.trace)
    written = render_trace(events, args.out_dir, args.cell_px)
    print(f"{len(written)} frames written to {args.out_dir}")
    return 0


def cmd_runs(args) -> int:
    records = fetch_runs(args.db, args.limit)
    if not records:
        print("No archived bench runs")
        return 0
    print(tabulate(records, headers="keys", tablefmt="github"))
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "run": cmd_run,
    "bench": cmd_bench,
    "render": cmd_render,
    "runs": cmd_runs,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required (gen, run, bench, render, runs)")
        return COMMANDS[args.command](args)
    except PlannerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
