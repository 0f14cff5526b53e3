"""
Benchmark sweeps over (agents, actors, obstacle density) configurations.

Every (config, seed) cell generates a random scenario, runs it and becomes one
BenchRow; each config then gets a mean row. Rows are sorted before they are
returned, so a process pool never changes the output.
"""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from tabulate import tabulate

from .config import CBS_NODE_BUDGET
from .scenario import ScenarioConfig, generate_random_scenario
from .sim import RunOptions, RunResult, run

logger = logging.getLogger(__name__)

Number = Union[int, float]


@dataclass(frozen=True)
class BenchRow:
    agents: int
    actors: int
    initial_viewpoints: Number
    obstacle_density_pct: Number
    actors_total_cost: float
    agents_total_cost: float
    nodes_expanded: Number
    tracking_accuracy_pct: float
    completion_time_s: float
    seed: str

    def values(self) -> Tuple:
        return astuple(self)


BENCH_HEADER: Tuple[str, ...] = tuple(f.name for f in fields(BenchRow))

# Columns averaged into the per-config mean row
_MEAN_FIELDS = BENCH_HEADER[2:9]


@dataclass(frozen=True, order=True)
class BenchConfig:
    agents: int
    actors: int
    density_pct: float


# Published (agents, actors, density %) configurations
REFERENCE_PRESET: Tuple[BenchConfig, ...] = (
    BenchConfig(3, 2, 7),
    BenchConfig(2, 2, 5),
    BenchConfig(3, 3, 5),
    BenchConfig(5, 5, 10),
    BenchConfig(10, 10, 15),
)

PRESETS = {"reference": REFERENCE_PRESET}


@dataclass(frozen=True)
class BenchSettings:
    size: int = 20
    length: int = 30
    seeds: int = 3
    base_seed: int = 0
    strategy: str = "optimal"
    record_timing: bool = True
    budget: int = CBS_NODE_BUDGET


def grid_configs(agents: Sequence[int], actors: Sequence[int], densities: Sequence[float]) -> List[BenchConfig]:
    """Cartesian product of the sweep axes, in sorted order."""
    return sorted({BenchConfig(m, n, d) for m in agents for n in actors for d in densities})


def _round(value: float) -> float:
    return round(value, 4)


def row_from_result(cfg: ScenarioConfig, result: RunResult, density_pct: Optional[float] = None) -> BenchRow:
    """Table row for a finished run; density defaults to the map's actual obstacle share."""
    if density_pct is None:
        density_pct = _round(100.0 * len(cfg.map.obstacles) / (cfg.map.width * cfg.map.height))
    m = result.metrics
    return BenchRow(
        agents=len(cfg.agents),
        actors=len(cfg.actors),
        initial_viewpoints=m.initial_viewpoints,
        obstacle_density_pct=density_pct,
        actors_total_cost=_round(m.actors_total_cost),
        agents_total_cost=_round(m.agents_total_cost),
        nodes_expanded=m.nodes_expanded,
        tracking_accuracy_pct=_round(m.tracking_accuracy),
        completion_time_s=_round(m.completion_time_s),
        seed=str(cfg.seed),
    )


def bench_cell(config: BenchConfig, seed: int, settings: BenchSettings) -> BenchRow:
    cfg = generate_random_scenario(
        seed=seed,
        width=settings.size,
        height=settings.size,
        density=config.density_pct / 100.0,
        n_actors=config.actors,
        m_agents=config.agents,
        run_length=settings.length,
    )
    result = run(cfg, RunOptions(settings.strategy, settings.budget, settings.record_timing))
    return row_from_result(cfg, result, config.density_pct)


def _bench_task(task: Tuple[BenchConfig, int, BenchSettings]) -> BenchRow:
    return bench_cell(*task)


def mean_row(rows: Sequence[BenchRow]) -> BenchRow:
    means = {name: _round(sum(getattr(r, name) for r in rows) / len(rows)) for name in _MEAN_FIELDS}
    return replace(rows[0], seed="mean", **means)


def run_bench(configs: Iterable[BenchConfig], settings: BenchSettings, workers: int = 1) -> List[BenchRow]:
    """Seed rows per config (seed order) followed by that config's mean row."""
    configs = list(configs)
    tasks = [
        (config, settings.base_seed + offset, settings)
        for config in configs
        for offset in range(settings.seeds)
    ]
    logger.info(f"Bench: {len(configs)} configs x {settings.seeds} seeds on {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_task, tasks))
    else:
        rows = [_bench_task(task) for task in tasks]

    out: List[BenchRow] = []
    for config in configs:
        mine = sorted(
            (r for r in rows if (r.agents, r.actors, r.obstacle_density_pct) == (config.agents, config.actors, config.density_pct)),
            key=lambda r: int(r.seed),
        )
        if not mine:
            continue
        out.extend(mine)
        out.append(mean_row(mine))
        logger.info(
            f"Bench config agents={config.agents} actors={config.actors} density={config.density_pct}%: "
            f"mean accuracy {out[-1].tracking_accuracy_pct}%"
        )
    return out


def dumps_csv(rows: Iterable[BenchRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    for row in rows:
        writer.writerow(row.values())
    return buffer.getvalue()


def write_csv(rows: Iterable[BenchRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dumps_csv(rows))
    logger.info(f"Bench CSV written to {path}")
    return path


def markdown_table(rows: Iterable[BenchRow]) -> str:
    headers = [name.replace("_", " ") for name in BENCH_HEADER]
    return tabulate([row.values() for row in rows], headers=headers, tablefmt="github")
