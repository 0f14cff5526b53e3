"""
Actor / agent / viewpoint assignment.

Phase 1 matches agents to actors at minimum total Euclidean cost (cost of a
pair = distance to the actor's nearest feasible viewpoint). Phase 2 gives each
matched agent its cheapest viewpoint. Phase 3 spreads surplus agents over
diverse viewpoints, round-robin over the least-covered actors.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .scenario import Cell, FovModel, GridMap
from .viewpoints import (
    DISTANCE_CELLS,
    GridViewpoint,
    blind_steps,
    feasible_viewpoints,
    select_diverse,
    steady_viewpoints,
    to_grid,
)
from .coverage import covers

logger = logging.getLogger(__name__)

STRATEGIES = ("optimal", "greedy")

_TOL = 1e-9


def euclidean(p1: Cell, p2: Cell) -> float:
    return math.hypot(p2[0] - p1[0], p2[1] - p1[1])


@dataclass(frozen=True)
class CostMatrix:
    rows: Tuple[str, ...]
    cols: Tuple[object, ...]
    entries: np.ndarray = field(compare=False)

    @classmethod
    def build(cls, agents: Mapping[str, Cell], candidates: Sequence[GridViewpoint]) -> "CostMatrix":
        entries = np.array(
            [[euclidean(cell, vp.cell) for vp in candidates] for cell in agents.values()],
            dtype=float,
        ).reshape(len(agents), len(candidates))
        return cls(tuple(agents), tuple(candidates), entries)


@dataclass(frozen=True)
class Matching:
    pairs: Tuple[Tuple[int, int], ...]
    total: float


# ==================== Matching solvers ====================

def _hungarian(cost: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Square min-cost assignment with dual potentials.

    Returns (row -> col, u, v) with cost[i, j] - u[i] - v[j] >= 0 everywhere
    and == 0 on the chosen pairs.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=int)  # p[j] = row matched to column j (1-based)
    way = np.zeros(n + 1, dtype=int)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    assignment = np.zeros(n, dtype=int)
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment, u[1:], v[1:]


def _optimum(cost: np.ndarray) -> float:
    if cost.size == 0:
        return 0.0
    assignment, _, _ = _hungarian(cost)
    return float(cost[np.arange(cost.shape[0]), assignment].sum())


def solve_min_cost(costs) -> Matching:
    """
    Optimal rectangular matching of size min(rows, cols).

    Among equal-cost optima the lexicographically smallest (agent index,
    viewpoint index) pairing wins: rows are fixed in order to the smallest
    column that still admits an optimal completion.
    """
    c = np.asarray(costs, dtype=float)
    if c.ndim != 2:
        c = c.reshape(len(c), -1)
    rows, cols = c.shape
    if rows == 0 or cols == 0:
        return Matching((), 0.0)
    n = max(rows, cols)
    padded = np.zeros((n, n))
    padded[:rows, :cols] = c

    _, u, v = _hungarian(padded)
    best = _optimum(padded)
    tol = _TOL * max(1.0, abs(best))

    free_cols = list(range(n))
    fixed: List[Tuple[int, int]] = []
    spent = 0.0
    for i in range(rows):
        for j in free_cols:
            # Only tight edges can appear in an optimal matching
            if padded[i, j] - u[i] - v[j] > tol:
                continue
            rest_cols = [col for col in free_cols if col != j]
            rest = padded[np.ix_(range(i + 1, n), rest_cols)]
            if abs(spent + padded[i, j] + _optimum(rest) - best) <= tol:
                fixed.append((i, j))
                spent += padded[i, j]
                free_cols = rest_cols
                break

    pairs = tuple((i, j) for i, j in fixed if j < cols)
    return Matching(pairs, float(sum(c[i, j] for i, j in pairs)))


def solve_greedy(costs) -> Matching:
    """Baseline: repeatedly take the globally cheapest free pair (ties by row, then column)."""
    c = np.asarray(costs, dtype=float)
    rows, cols = c.shape if c.ndim == 2 else (0, 0)
    order = sorted((c[i, j], i, j) for i in range(rows) for j in range(cols))
    used_rows, used_cols, pairs = set(), set(), []
    for _, i, j in order:
        if i in used_rows or j in used_cols:
            continue
        pairs.append((i, j))
        used_rows.add(i)
        used_cols.add(j)
    pairs.sort()
    return Matching(tuple(pairs), float(sum(c[i, j] for i, j in pairs)))


SOLVERS: Dict[str, Callable[[np.ndarray], Matching]] = {
    "optimal": solve_min_cost,
    "greedy": solve_greedy,
}


# ==================== Assignment ====================

@dataclass(frozen=True)
class AssignmentTuple:
    actor_id: str
    agent_id: str
    viewpoint: GridViewpoint


@dataclass(frozen=True)
class Assignment:
    tuples: Tuple[AssignmentTuple, ...] = ()
    uncoverable: Tuple[str, ...] = ()
    idle: Tuple[str, ...] = ()

    @property
    def agent_ids(self) -> Tuple[str, ...]:
        return tuple(entry.agent_id for entry in self.tuples)

    def for_agent(self, agent_id: str) -> Optional[AssignmentTuple]:
        for entry in self.tuples:
            if entry.agent_id == agent_id:
                return entry
        return None

    def actor_of(self) -> Dict[str, str]:
        return {entry.agent_id: entry.actor_id for entry in self.tuples}

    def total_cost(self, agent_cells: Mapping[str, Cell]) -> float:
        return sum(euclidean(agent_cells[e.agent_id], e.viewpoint.cell) for e in self.tuples)

    def goals(self) -> Dict[str, Cell]:
        return {entry.agent_id: entry.viewpoint.cell for entry in self.tuples}


def _cheapest(agent_cell: Cell, candidates: Sequence[GridViewpoint]) -> GridViewpoint:
    return min(candidates, key=lambda vp: euclidean(agent_cell, vp.cell))


def assign(
    agents: Mapping[str, Cell],
    actors: Mapping[str, Cell],
    grid: GridMap,
    fov: FovModel = FovModel(),
    strategy: str = "optimal",
    distance_cells: Sequence[int] = DISTANCE_CELLS,
    watch: Optional[Mapping[str, Sequence[Cell]]] = None,
) -> Assignment:
    """
    Build an assignment of agents to (actor, viewpoint) pairs.

    `watch` maps actor ids to the cells they pass through before reaching
    `actors`. Those cells are goals only when nothing else is feasible, and each
    actor's viewpoints narrow to the ones that keep it in view along the way.
    """
    solve = SOLVERS[strategy]
    watch = watch or {}
    occupied = frozenset(actors.values())
    in_transit = occupied.union(*watch.values())

    candidates: Dict[str, List[GridViewpoint]] = {}
    uncoverable = []
    for actor_id, pos in actors.items():
        found = feasible_viewpoints(actor_id, pos, grid, fov, in_transit, distance_cells)
        if not found and in_transit != occupied:
            found = feasible_viewpoints(actor_id, pos, grid, fov, occupied, distance_cells)
        found = steady_viewpoints(found, watch.get(actor_id, ()), fov, grid)
        if found:
            candidates[actor_id] = found
        else:
            uncoverable.append(actor_id)
    if uncoverable:
        logger.warning(f"Uncoverable actors (no feasible viewpoint): {', '.join(uncoverable)}")

    agent_ids = list(agents)
    actor_ids = list(candidates)
    if not actor_ids:
        return Assignment((), tuple(uncoverable), tuple(agent_ids))

    # Phase 1: agents -> actors over min-over-viewpoint costs
    costs = np.array(
        [[min(euclidean(agents[d], vp.cell) for vp in candidates[a]) for a in actor_ids] for d in agent_ids]
    )
    matching = solve(costs)

    # Phase 2: matched agents take their cheapest free viewpoint
    chosen: Dict[str, AssignmentTuple] = {}
    taken = set()
    for i, j in sorted(matching.pairs):
        agent_id, actor_id = agent_ids[i], actor_ids[j]
        options = [vp for vp in candidates[actor_id] if vp.cell not in taken]
        if not options:
            continue
        vp = _cheapest(agents[agent_id], options)
        taken.add(vp.cell)
        chosen[agent_id] = AssignmentTuple(actor_id, agent_id, vp)

    # Phase 3: surplus agents spread over diverse viewpoints
    surplus = [d for d in agent_ids if d not in chosen]
    if surplus:
        per_actor = {a: [e.viewpoint for e in chosen.values() if e.actor_id == a] for a in actor_ids}
        slots: List[GridViewpoint] = []
        progress = True
        while len(slots) < len(surplus) and progress:
            progress = False
            for actor_id in sorted(actor_ids, key=lambda a: (len(per_actor[a]), a)):
                used_yaws = {vp.source.yaw_idx for vp in per_actor[actor_id]}
                options = [
                    vp for vp in candidates[actor_id]
                    if vp.cell not in taken and vp.source.yaw_idx not in used_yaws
                ]
                pick = select_diverse(1, options, chosen=per_actor[actor_id])
                if not pick:
                    continue
                slots.append(pick[0])
                per_actor[actor_id].append(pick[0])
                taken.add(pick[0].cell)
                progress = True
                if len(slots) == len(surplus):
                    break

        if slots:
            extra = solve(CostMatrix.build({d: agents[d] for d in surplus}, slots).entries)
            for i, j in extra.pairs:
                vp = slots[j]
                chosen[surplus[i]] = AssignmentTuple(vp.actor_id, surplus[i], vp)

    tuples = tuple(chosen[d] for d in agent_ids if d in chosen)
    idle = tuple(d for d in agent_ids if d not in chosen)
    return Assignment(tuples, tuple(uncoverable), idle)


def reproject(
    current: Assignment,
    actors: Mapping[str, Cell],
    grid: GridMap,
    fov: FovModel = FovModel(),
    distance_cells: Sequence[int] = DISTANCE_CELLS,
    watch: Optional[Mapping[str, Sequence[Cell]]] = None,
) -> Optional[Assignment]:
    """
    Move every viewpoint of `current` onto its actor's new position, keeping the
    spherical indices. None if any viewpoint stops being feasible or, given
    `watch`, stands in an actor's way or loses sight of its actor on the way.
    """
    watch = watch or {}
    occupied = set(actors.values()).union(*watch.values())
    taken = set()
    tuples = []
    for entry in current.tuples:
        pos = actors.get(entry.actor_id)
        if pos is None:
            return None
        vp = to_grid(entry.viewpoint.source, pos, grid, distance_cells)
        if vp is None or vp.cell in occupied or vp.cell in taken:
            return None
        if not covers(vp.cell, vp.facing_idx, pos, fov, grid):
            return None
        if blind_steps(vp, watch.get(entry.actor_id, ()), fov, grid):
            return None
        taken.add(vp.cell)
        tuples.append(AssignmentTuple(entry.actor_id, entry.agent_id, vp))
    return Assignment(tuple(tuples), current.uncoverable, current.idle)


def reassign(
    current: Optional[Assignment],
    fresh: Assignment,
    agent_cells: Mapping[str, Cell],
    actors: Mapping[str, Cell],
    grid: GridMap,
    hysteresis: float = 0.0,
    fov: FovModel = FovModel(),
    distance_cells: Sequence[int] = DISTANCE_CELLS,
    watch: Optional[Mapping[str, Sequence[Cell]]] = None,
) -> Tuple[Assignment, bool]:
    """
    Adopt `fresh` only if it beats the re-projected current assignment by more
    than `hysteresis`. Returns (assignment, adopted_fresh).
    """
    if current is None or not current.tuples:
        return fresh, True
    if len(fresh.tuples) > len(current.tuples):
        # Coverage before cost
        return fresh, True
    kept = reproject(current, actors, grid, fov, distance_cells, watch)
    if kept is None:
        return fresh, True
    if kept.total_cost(agent_cells) - fresh.total_cost(agent_cells) > hysteresis:
        return fresh, True
    return kept, False
