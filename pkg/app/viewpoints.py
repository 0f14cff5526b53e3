"""
Camera viewpoint lattice around an actor.

Each actor is surrounded by a half-sphere of 16 yaw x 6 tilt x 6 distance
poses (576 in total). Poses are projected onto the grid along their yaw ray;
tilt only shortens the ground range because agents fly in the plane.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, List, Optional, Sequence, Tuple

from .coverage import YAW_BINS, YAW_STEP, covers, quantize_yaw, yaw_vector
from .scenario import Cell, FovModel, GridMap

logger = logging.getLogger(__name__)

TILT_BINS = 6
DIST_BINS = 6
LATTICE_SIZE = YAW_BINS * TILT_BINS * DIST_BINS

# Grid-cell radius per distance bin, close-up to long shot
DISTANCE_CELLS: Tuple[int, ...] = (2, 3, 4, 5, 6, 8)


@dataclass(frozen=True)
class SphericalViewpoint:
    actor_id: str
    yaw_idx: int
    tilt_idx: int
    dist_idx: int

    @property
    def yaw(self) -> float:
        return self.yaw_idx * YAW_STEP

    @property
    def tilt(self) -> float:
        """Elevation above horizontal, bin centre."""
        return (math.pi / 2) * (self.tilt_idx + 0.5) / TILT_BINS

    @property
    def indices(self) -> Tuple[int, int, int]:
        return self.yaw_idx, self.tilt_idx, self.dist_idx


@dataclass(frozen=True)
class GridViewpoint:
    actor_id: str
    cell: Cell
    facing_idx: int
    source: SphericalViewpoint

    @property
    def facing(self) -> Tuple[float, float]:
        return yaw_vector(self.facing_idx)


def build_lattice(actor_id: str) -> List[SphericalViewpoint]:
    """All 576 poses, yaw-major then tilt then distance."""
    return [
        SphericalViewpoint(actor_id, yaw, tilt, dist)
        for yaw in range(YAW_BINS)
        for tilt in range(TILT_BINS)
        for dist in range(DIST_BINS)
    ]


def ground_range(vp: SphericalViewpoint, distance_cells: Sequence[int] = DISTANCE_CELLS) -> int:
    return round(distance_cells[vp.dist_idx] * math.cos(vp.tilt))


def _snap_order(r: int, limit: int):
    """r, r+1, r-1, r+2, r-2, ... restricted to 1..limit."""
    for d in range(0, r + limit + 1):
        for k in ((r,) if d == 0 else (r + d, r - d)):
            if 1 <= k <= limit:
                yield k


def to_grid(
    vp: SphericalViewpoint,
    actor_pos: Cell,
    grid: GridMap,
    distance_cells: Sequence[int] = DISTANCE_CELLS,
) -> Optional[GridViewpoint]:
    """
    Project a pose to a free grid cell on its yaw ray, or None if infeasible.

    The cell is snapped to the nearest free cell along the ray, never farther
    than the longest distance bin from the actor.
    """
    r = ground_range(vp, distance_cells)
    if r == 0:
        return None
    dx = round(math.cos(vp.yaw))
    dy = round(math.sin(vp.yaw))
    limit = min(int(max(distance_cells) / math.hypot(dx, dy) + 1e-9), grid.diagonal)
    for k in _snap_order(r, limit):
        cell = (actor_pos[0] + k * dx, actor_pos[1] + k * dy)
        if grid.is_free(cell):
            return GridViewpoint(vp.actor_id, cell, quantize_yaw(cell, actor_pos), vp)
    return None


@lru_cache(maxsize=4096)
def _visible_projections(
    actor_pos: Cell,
    grid: GridMap,
    fov: FovModel,
    distance_cells: Tuple[int, ...],
) -> Tuple[GridViewpoint, ...]:
    # Several poses land on the same cell; keep the one whose yaw best matches
    # the cell's true bearing from the actor, earliest in lattice order on ties.
    best = {}
    for order, vp in enumerate(build_lattice("")):
        gv = to_grid(vp, actor_pos, grid, distance_cells)
        if gv is None:
            continue
        bearing = (gv.facing_idx + YAW_BINS // 2) % YAW_BINS
        key = (yaw_separation(vp.yaw_idx, bearing), order)
        if gv.cell not in best or key < best[gv.cell][0]:
            best[gv.cell] = (key, gv)
    found = [
        gv for _, gv in sorted(best.values(), key=lambda item: item[0][1])
        if covers(gv.cell, gv.facing_idx, actor_pos, fov, grid)
    ]
    return tuple(found)


def feasible_viewpoints(
    actor_id: str,
    actor_pos: Cell,
    grid: GridMap,
    fov: FovModel,
    blocked: FrozenSet[Cell] = frozenset(),
    distance_cells: Sequence[int] = DISTANCE_CELLS,
) -> List[GridViewpoint]:
    """
    Projected viewpoints an agent could film the actor from.

    One viewpoint per cell (the pose best aligned with the cell); cells in `blocked` are
    dropped and the actor must be inside the FOV with a clear line of sight.
    """
    result = []
    for gv in _visible_projections(actor_pos, grid, fov, tuple(distance_cells)):
        if gv.cell in blocked:
            continue
        source = SphericalViewpoint(actor_id, *gv.source.indices)
        result.append(GridViewpoint(actor_id, gv.cell, gv.facing_idx, source))
    return result


def blind_steps(vp: GridViewpoint, watch: Sequence[Cell], fov: FovModel, grid: GridMap) -> int:
    """How many of the watched actor cells the viewpoint's cell cannot film."""
    return sum(1 for cell in watch if not covers(vp.cell, quantize_yaw(vp.cell, cell), cell, fov, grid))


def steady_viewpoints(
    feasible: Sequence[GridViewpoint],
    watch: Sequence[Cell],
    fov: FovModel,
    grid: GridMap,
) -> List[GridViewpoint]:
    """
    The viewpoints that keep the actor in view over the most watched cells.

    When some viewpoint sees every watched cell, exactly those survive; otherwise
    the least blind ones do. Order is preserved.
    """
    if not feasible or not watch:
        return list(feasible)
    misses = [blind_steps(vp, watch, fov, grid) for vp in feasible]
    fewest = min(misses)
    return [vp for vp, m in zip(feasible, misses) if m == fewest]


def yaw_separation(a: int, b: int) -> int:
    """Circular distance between two yaw indices."""
    diff = abs(a - b) % YAW_BINS
    return min(diff, YAW_BINS - diff)


def _preference(vp: GridViewpoint) -> Tuple[int, int, int]:
    return vp.source.dist_idx, vp.source.tilt_idx, vp.source.yaw_idx


def select_diverse(
    k: int,
    feasible: Sequence[GridViewpoint],
    chosen: Sequence[GridViewpoint] = (),
) -> List[GridViewpoint]:
    """
    Greedily pick up to k viewpoints maximising the minimum pairwise yaw separation.

    Without `chosen`, the first pick is the pose nearest yaw 0 (ties: smaller
    distance bin, then smaller tilt bin). With `chosen`, picks extend that set.
    Returned cells are distinct from each other and from `chosen`.
    """
    picked: List[GridViewpoint] = []
    taken = {vp.cell for vp in chosen}
    anchors = [vp.source.yaw_idx for vp in chosen]

    while len(picked) < k:
        candidates = [vp for vp in feasible if vp.cell not in taken]
        if not candidates:
            break
        if anchors:
            best = min(
                candidates,
                key=lambda vp: (-min(yaw_separation(vp.source.yaw_idx, a) for a in anchors), *_preference(vp)),
            )
        else:
            best = min(candidates, key=lambda vp: (yaw_separation(vp.source.yaw_idx, 0), *_preference(vp)))
        picked.append(best)
        taken.add(best.cell)
        anchors.append(best.source.yaw_idx)
    return picked
