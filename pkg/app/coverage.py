"""
Geometric coverage model.

An agent covers an actor when the actor lies inside the agent's field-of-view
sector (half angle around the facing direction, bounded range) and no obstacle
sits on the grid line between them. This sector-plus-line-of-sight test is the
concrete coverage function used for tracking accuracy.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, FrozenSet, Iterable, Iterator, Mapping, Tuple

from .scenario import Cell, FovModel, GridMap
from .trace import TraceEvent

if TYPE_CHECKING:
    from .assignment import Assignment

logger = logging.getLogger(__name__)

YAW_BINS = 16
YAW_STEP = 2 * math.pi / YAW_BINS

Visibility = Callable[[GridMap, Cell, Cell], bool]


def yaw_vector(yaw_idx: int) -> Tuple[float, float]:
    angle = (yaw_idx % YAW_BINS) * YAW_STEP
    return math.cos(angle), math.sin(angle)


def quantize_yaw(src: Cell, dst: Cell) -> int:
    """Index of the quantized yaw pointing from src toward dst."""
    angle = math.atan2(dst[1] - src[1], dst[0] - src[0])
    return round(angle / YAW_STEP) % YAW_BINS


def _line_cells(a: Cell, b: Cell) -> Iterator[Cell]:
    x0, y0 = a
    x1, y1 = b
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        yield x0, y0
        if (x0, y0) == (x1, y1):
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def line_of_sight(grid: GridMap, src: Cell, dst: Cell) -> bool:
    """True iff no strictly interior cell of the integer line src->dst is an obstacle."""
    for cell in _line_cells(src, dst):
        if cell != src and cell != dst and cell in grid.obstacles:
            return False
    return True


def covers(
    agent_cell: Cell,
    facing_idx: int,
    actor_cell: Cell,
    fov: FovModel,
    grid: GridMap,
    visibility: Visibility = line_of_sight,
) -> bool:
    if agent_cell == actor_cell:
        return False
    vx = actor_cell[0] - agent_cell[0]
    vy = actor_cell[1] - agent_cell[1]
    distance = math.hypot(vx, vy)
    if distance > fov.range_cells:
        return False
    fx, fy = yaw_vector(facing_idx)
    cos_angle = max(-1.0, min(1.0, (vx * fx + vy * fy) / distance))
    if math.degrees(math.acos(cos_angle)) > fov.half_angle_deg + 1e-9:
        return False
    return visibility(grid, agent_cell, actor_cell)


def coverage(
    assignment: "Assignment",
    agent_cells: Mapping[str, Cell],
    agent_facings: Mapping[str, int],
    actor_cells: Mapping[str, Cell],
    fov: FovModel,
    grid: GridMap,
    visibility: Visibility = line_of_sight,
) -> int:
    """Number of distinct actors covered by at least one of their assigned agents."""
    return len(covered_actors(assignment, agent_cells, agent_facings, actor_cells, fov, grid, visibility))


def covered_actors(
    assignment: "Assignment",
    agent_cells: Mapping[str, Cell],
    agent_facings: Mapping[str, int],
    actor_cells: Mapping[str, Cell],
    fov: FovModel,
    grid: GridMap,
    visibility: Visibility = line_of_sight,
) -> FrozenSet[str]:
    covered = set()
    for entry in assignment.tuples:
        if entry.actor_id in covered:
            continue
        if covers(
            agent_cells[entry.agent_id],
            agent_facings[entry.agent_id],
            actor_cells[entry.actor_id],
            fov,
            grid,
            visibility,
        ):
            covered.add(entry.actor_id)
    return frozenset(covered)


@dataclass(frozen=True)
class CoverageReport:
    timesteps: Tuple[int, ...]
    covered: Tuple[FrozenSet[str], ...]
    counts: Tuple[int, ...]
    tracking_accuracy: float
    empty_run: bool


def coverage_report(events: Iterable[TraceEvent]) -> CoverageReport:
    """Summarise the coverage events of a finished run."""
    steps = sorted((e for e in events if e.kind == "coverage"), key=lambda e: e.t)
    tracked = 0
    active = 0
    for event in steps:
        for record in event.payload["agents"].values():
            if record["actor"] is None:
                continue
            active += 1
            tracked += bool(record["covered"])
    return CoverageReport(
        timesteps=tuple(e.t for e in steps),
        covered=tuple(frozenset(e.payload["covered"]) for e in steps),
        counts=tuple(e.payload["count"] for e in steps),
        tracking_accuracy=100.0 * tracked / active if active else 0.0,
        empty_run=active == 0,
    )


def tracking_accuracy(events: Iterable[TraceEvent]) -> float:
    """Percent of agent-timesteps whose assigned actor was covered by that agent (0 for empty runs)."""
    return coverage_report(events).tracking_accuracy


def agent_coverage(
    assignment: "Assignment",
    agent_cells: Mapping[str, Cell],
    agent_facings: Mapping[str, int],
    actor_cells: Mapping[str, Cell],
    fov: FovModel,
    grid: GridMap,
) -> Dict[str, bool]:
    """Per assigned agent: does it cover its own actor right now."""
    return {
        entry.agent_id: covers(
            agent_cells[entry.agent_id],
            agent_facings[entry.agent_id],
            actor_cells[entry.actor_id],
            fov,
            grid,
        )
        for entry in assignment.tuples
    }
