"""
Scenario world model

A scenario is a 2D occupancy grid, one scripted track per actor, one start cell
per agent and the planning parameters of the receding-horizon loop:
- Tracks hold one cell per timestep (t = 0..L) and move at most one 4-connected step
- Agent starts are distinct, free, and never on an actor start
- Scenarios are immutable; generation is a pure function of its arguments
"""

import logging
import math
import random
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from .errors import GenerationError, ScenarioValidationError
from .schemas import FieldError, ScenarioFile

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

# Fixed neighbour order keeps every search deterministic
MOVES: Tuple[Cell, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))

MAX_DENSITY = 0.5
PLACEMENT_ATTEMPTS = 100
STAY_PROBABILITY = 0.25
LAUNCH_RADIUS = 6.0


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    obstacles: FrozenSet[Cell] = frozenset()

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.obstacles

    def neighbors(self, cell: Cell) -> List[Cell]:
        """Free 4-connected neighbours in MOVES order."""
        x, y = cell
        return [(x + dx, y + dy) for dx, dy in MOVES if self.is_free((x + dx, y + dy))]

    def free_cells(self) -> List[Cell]:
        return [
            (x, y)
            for x in range(self.width)
            for y in range(self.height)
            if (x, y) not in self.obstacles
        ]

    @property
    def diagonal(self) -> int:
        return math.ceil(math.hypot(self.width, self.height))


@dataclass(frozen=True)
class ActorTrack:
    actor_id: str
    positions: Tuple[Cell, ...]


@dataclass(frozen=True)
class AgentStart:
    agent_id: str
    cell: Cell


@dataclass(frozen=True)
class FovModel:
    half_angle_deg: float = 45.0
    range_cells: float = 9.0


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    map: GridMap
    actors: Tuple[ActorTrack, ...]
    agents: Tuple[AgentStart, ...]
    horizon_steps: int = 5
    step_seconds: float = 2.0
    execute_steps: int = 1
    fov: FovModel = FovModel()
    hysteresis: float = 0.0

    @property
    def run_length(self) -> int:
        """Number of executed timesteps (tracks hold run_length + 1 cells)."""
        if not self.actors:
            return 0
        return len(self.actors[0].positions) - 1


def actor_position_at(track: ActorTrack, t: int) -> Cell:
    """Position of the actor at timestep t, clamped to the ends of the track."""
    index = min(max(t, 0), len(track.positions) - 1)
    return track.positions[index]


# ==================== Generation ====================

def _component(grid: GridMap, origin: Cell) -> set:
    seen = {origin}
    queue = deque([origin])
    while queue:
        cell = queue.popleft()
        for nxt in grid.neighbors(cell):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _launch_pool(grid: GridMap, candidates: Sequence[Cell], home: Cell) -> List[Cell]:
    """Free cells an agent may launch from: near its actor and seeing it, else near it, else anywhere."""
    from .coverage import line_of_sight  # coverage imports this module

    near = [c for c in candidates if math.dist(c, home) <= LAUNCH_RADIUS]
    in_view = [c for c in near if line_of_sight(grid, c, home)]
    return in_view or near or list(candidates)


def _random_walk(rng: random.Random, grid: GridMap, start: Cell, steps: int) -> Tuple[Cell, ...]:
    """Lazy random walk: stay with STAY_PROBABILITY, else a uniform free neighbour."""
    positions = [start]
    for _ in range(steps):
        current = positions[-1]
        options = grid.neighbors(current)
        if not options or rng.random() < STAY_PROBABILITY:
            positions.append(current)
        else:
            positions.append(rng.choice(options))
    return tuple(positions)


def generate_random_scenario(
    seed: int,
    width: int,
    height: int,
    density: float,
    n_actors: int,
    m_agents: int,
    run_length: int,
    horizon_steps: int = 5,
    execute_steps: int = 1,
    step_seconds: float = 2.0,
    fov: Optional[FovModel] = None,
    hysteresis: float = 0.0,
) -> ScenarioConfig:
    """
    Build a seeded random scenario.

    Obstacles are sampled without replacement from all cells; a placement is
    rejected when any start is cut off from the others, and generation fails
    after PLACEMENT_ATTEMPTS rejections. Agent i launches within LAUNCH_RADIUS
    of actor i mod n_actors, in its line of sight when such a cell exists.
    """
    if seed < 0:
        raise GenerationError(f"seed {seed} must be non-negative")
    if not 0 <= density <= MAX_DENSITY:
        raise GenerationError(f"density {density} outside [0, {MAX_DENSITY}]")
    if n_actors < 1 or m_agents < 1:
        raise GenerationError("need at least one actor and one agent")
    if width < 1 or height < 1:
        raise GenerationError("map must be at least 1x1")
    if run_length < 0:
        raise GenerationError("run length must be non-negative")

    all_cells = [(x, y) for x in range(width) for y in range(height)]
    n_obstacles = round(density * width * height)
    if len(all_cells) - n_obstacles < n_actors + m_agents:
        raise GenerationError(
            f"{len(all_cells) - n_obstacles} free cells cannot hold "
            f"{n_actors} actors and {m_agents} agents"
        )

    rng = random.Random(seed)
    for attempt in range(PLACEMENT_ATTEMPTS):
        grid = GridMap(width, height, frozenset(rng.sample(all_cells, n_obstacles)))
        free = grid.free_cells()
        actor_starts = rng.sample(free, n_actors)
        taken = set(actor_starts)
        agent_starts = []
        for i in range(m_agents):
            pool = _launch_pool(grid, [c for c in free if c not in taken], actor_starts[i % n_actors])
            agent_starts.append(rng.choice(pool))
            taken.add(agent_starts[-1])

        reachable = _component(grid, actor_starts[0])
        if not all(c in reachable for c in actor_starts + agent_starts):
            logger.debug(f"seed {seed}: placement {attempt} disconnected, retrying")
            continue

        actors = tuple(
            ActorTrack(f"a{i + 1:02d}", _random_walk(rng, grid, start, run_length))
            for i, start in enumerate(actor_starts)
        )
        agents = tuple(AgentStart(f"d{i + 1:02d}", cell) for i, cell in enumerate(agent_starts))
        return ScenarioConfig(
            seed=seed,
            map=grid,
            actors=actors,
            agents=agents,
            horizon_steps=horizon_steps,
            step_seconds=step_seconds,
            execute_steps=execute_steps,
            fov=fov or FovModel(),
            hysteresis=hysteresis,
        )

    logger.warning(f"seed {seed}: no connected placement after {PLACEMENT_ATTEMPTS} attempts")
    raise GenerationError(f"no connected placement found after {PLACEMENT_ATTEMPTS} attempts")


# ==================== File I/O ====================

def _document(cfg: ScenarioConfig) -> dict:
    return {
        "seed": cfg.seed,
        "width": cfg.map.width,
        "height": cfg.map.height,
        "obstacles": [list(c) for c in sorted(cfg.map.obstacles)],
        "actors": [{"id": a.actor_id, "track": [list(c) for c in a.positions]} for a in cfg.actors],
        "agents": [{"id": d.agent_id, "start": list(d.cell)} for d in cfg.agents],
        "horizon_steps": cfg.horizon_steps,
        "step_seconds": cfg.step_seconds,
        "execute_steps": cfg.execute_steps,
        "fov": {"half_angle_deg": cfg.fov.half_angle_deg, "range_cells": cfg.fov.range_cells},
        "hysteresis": cfg.hysteresis,
    }


def _format_loc(loc: Sequence) -> str:
    text = ""
    for part in loc:
        text += f"[{part}]" if isinstance(part, int) else (f".{part}" if text else str(part))
    return text


def _validation_error(exc: ValidationError) -> ScenarioValidationError:
    err = exc.errors()[0]
    cause = (err.get("ctx") or {}).get("error")
    if isinstance(cause, FieldError):
        return ScenarioValidationError(cause.reason, field=cause.field)
    return ScenarioValidationError(err["msg"], field=_format_loc(err["loc"]) or None)


def _from_file(doc: ScenarioFile) -> ScenarioConfig:
    return ScenarioConfig(
        seed=doc.seed,
        map=GridMap(doc.width, doc.height, frozenset(tuple(c) for c in doc.obstacles)),
        actors=tuple(ActorTrack(a.id, tuple(tuple(c) for c in a.track)) for a in doc.actors),
        agents=tuple(AgentStart(d.id, tuple(d.start)) for d in doc.agents),
        horizon_steps=doc.horizon_steps,
        step_seconds=doc.step_seconds,
        execute_steps=doc.execute_steps,
        fov=FovModel(doc.fov.half_angle_deg, doc.fov.range_cells),
        hysteresis=doc.hysteresis,
    )


def check_scenario(cfg: ScenarioConfig) -> ScenarioConfig:
    """Validate an in-memory scenario against the file schema."""
    try:
        ScenarioFile.model_validate(_document(cfg))
    except ValidationError as exc:
        raise _validation_error(exc) from exc
    return cfg


def dumps_scenario(cfg: ScenarioConfig) -> str:
    """Canonical text form; equal scenarios give identical text."""
    try:
        doc = ScenarioFile.model_validate(_document(cfg))
    except ValidationError as exc:
        raise _validation_error(exc) from exc
    return doc.model_dump_json(indent=2) + "\n"


def loads_scenario(text: str) -> ScenarioConfig:
    try:
        doc = ScenarioFile.model_validate_json(text)
    except ValidationError as exc:
        raise _validation_error(exc) from exc
    return _from_file(doc)


def save_scenario(cfg: ScenarioConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dumps_scenario(cfg))
    logger.info(f"Scenario written to {path}")
    return path


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ScenarioValidationError(f"scenario file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ScenarioValidationError(f"scenario file is not UTF-8 text: {exc.reason} at byte {exc.start}") from exc
    return loads_scenario(text)


def iter_actor_cells(cfg: ScenarioConfig, t: int) -> Iterable[Tuple[str, Cell]]:
    for track in cfg.actors:
        yield track.actor_id, actor_position_at(track, t)
