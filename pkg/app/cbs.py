"""
Conflict-Based Search over a 4-connected grid with wait actions.

Low level: space-time A* per agent under that agent's constraints, bounded by
the planning horizon, with actors as moving vertex obstacles. High level: a
best-first constraint tree that splits on the earliest conflict.

Search objective per agent is its arrival time (moves plus waits before the
final arrival; waiting at the goal afterwards is free). An agent that cannot
reach its goal within the horizon gets a best-effort path costing the full
horizon, ending as close to the goal as possible.
"""

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

from .assignment import euclidean
from .config import CBS_NODE_BUDGET
from .errors import PlanningError
from .scenario import MOVES, Cell, GridMap

logger = logging.getLogger(__name__)

# Wait first, then the fixed move order
ACTIONS: Tuple[Cell, ...] = ((0, 0),) + MOVES

DynamicObstacles = Mapping[int, FrozenSet[Cell]]


@dataclass(frozen=True)
class SpaceTimePath:
    agent_id: str
    cells: Tuple[Cell, ...]

    def at(self, t: int) -> Cell:
        return self.cells[min(t, len(self.cells) - 1)]

    def padded(self, length: int) -> "SpaceTimePath":
        if len(self.cells) >= length:
            return self
        return SpaceTimePath(self.agent_id, self.cells + (self.cells[-1],) * (length - len(self.cells)))


@dataclass(frozen=True)
class Constraint:
    """Vertex constraint when `prev` is None, else edge constraint prev -> cell arriving at t."""

    agent_id: str
    cell: Cell
    t: int
    prev: Optional[Cell] = None

    def __post_init__(self):
        if self.prev is not None and self.t < 1:
            raise ValueError("edge constraints need t >= 1")

    @property
    def kind(self) -> str:
        return "vertex" if self.prev is None else "edge"


@dataclass(frozen=True)
class Conflict:
    agent_a: str
    agent_b: str
    kind: str
    t: int
    cell: Cell
    # Edge conflicts: agent_a moved prev -> cell while agent_b moved cell -> prev
    prev: Optional[Cell] = None


@dataclass
class CbsStats:
    high_level_nodes_expanded: int = 0
    low_level_expansions: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class LowLevelResult:
    path: SpaceTimePath
    objective: int
    reached: bool


@dataclass
class ConflictTreeNode:
    constraints: Tuple[Constraint, ...]
    paths: Dict[str, SpaceTimePath]
    objectives: Dict[str, int]
    reached: Dict[str, bool]

    @property
    def cost(self) -> int:
        return sum(self.objectives.values())


@dataclass(frozen=True)
class CbsSolution:
    paths: Dict[str, SpaceTimePath]
    objectives: Dict[str, int]
    best_effort: FrozenSet[str]
    stats: CbsStats = field(compare=False)

    @property
    def cost(self) -> int:
        return sum(self.objectives.values())


def path_cost(path: SpaceTimePath) -> float:
    """Sum of Euclidean distances between consecutive waypoints (waits add nothing)."""
    return sum(euclidean(a, b) for a, b in zip(path.cells, path.cells[1:]))


def path_objective(cells: Sequence[Cell], goal: Cell) -> int:
    """Arrival time if the path ends at the goal, else its full length in steps."""
    last = len(cells) - 1
    if cells[last] != goal:
        return last
    arrival = last
    while arrival > 0 and cells[arrival - 1] == goal:
        arrival -= 1
    return arrival


def _manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _rebuild(agent_id: str, parents: dict, state) -> SpaceTimePath:
    cells = []
    while state is not None:
        cells.append(state[0])
        state = parents[state]
    return SpaceTimePath(agent_id, tuple(reversed(cells)))


def low_level_search(
    agent_id: str,
    start: Cell,
    goal: Cell,
    constraints: Iterable[Constraint],
    grid: GridMap,
    horizon: int,
    dynamic_obstacles: Optional[DynamicObstacles] = None,
    stats: Optional[CbsStats] = None,
) -> Optional[LowLevelResult]:
    """
    Minimum-objective path for one agent, or None if no constraint-satisfying
    path of any length up to the horizon exists.

    Ties prefer fewer waits, then smaller (x, y, t).
    """
    vertex = set()
    edges = set()
    for c in constraints:
        if c.agent_id != agent_id:
            continue
        if c.prev is None:
            vertex.add((c.cell, c.t))
        else:
            edges.add((c.prev, c.cell, c.t))
    dynamic = dynamic_obstacles or {}

    def blocked(cell: Cell, t: int) -> bool:
        return (cell, t) in vertex or cell in dynamic.get(t, ())

    # The goal only counts once the agent can stay there until the horizon
    last_block = max(
        [t for cell, t in vertex if cell == goal]
        + [t for t, cells in dynamic.items() if goal in cells and 0 < t <= horizon],
        default=-1,
    )

    def step(cell: Cell, t: int):
        for dx, dy in ACTIONS:
            nxt = (cell[0] + dx, cell[1] + dy)
            if not grid.is_free(nxt) or blocked(nxt, t + 1) or (cell, nxt, t + 1) in edges:
                continue
            yield nxt, dx == 0 and dy == 0

    expansions = 0
    parents = {}
    start_state = (start, 0)
    open_list = [(_manhattan(start, goal), 0, start[0], start[1], 0, None)]
    while open_list:
        _, waits, x, y, t, parent = heapq.heappop(open_list)
        cell = (x, y)
        if (cell, t) in parents:
            continue
        parents[(cell, t)] = parent
        expansions += 1
        if cell == goal and t > last_block:
            if stats is not None:
                stats.low_level_expansions += expansions
            return LowLevelResult(_rebuild(agent_id, parents, (cell, t)), t, True)
        if t == horizon:
            continue
        for nxt, waited in step(cell, t):
            f = t + 1 + _manhattan(nxt, goal)
            if f > horizon or (nxt, t + 1) in parents:
                continue
            heapq.heappush(open_list, (f, waits + waited, nxt[0], nxt[1], t + 1, (cell, t)))

    # Goal unreachable in time: sweep every reachable space-time state
    layer = {start: 0}
    best_effort_parents = {start_state: None}
    for t in range(horizon):
        expansions += len(layer)
        nxt_layer = {}
        for cell in sorted(layer):
            for nxt, waited in step(cell, t):
                waits = layer[cell] + waited
                if nxt not in nxt_layer or waits < nxt_layer[nxt][0]:
                    nxt_layer[nxt] = (waits, cell)
        if not nxt_layer:
            if stats is not None:
                stats.low_level_expansions += expansions
            return None
        for nxt, (_, prev) in nxt_layer.items():
            best_effort_parents[(nxt, t + 1)] = (prev, t)
        layer = {c: w for c, (w, _) in nxt_layer.items()}

    if stats is not None:
        stats.low_level_expansions += expansions
    final = min(layer, key=lambda c: (euclidean(c, goal), layer[c], c))
    path = _rebuild(agent_id, best_effort_parents, (final, horizon))
    return LowLevelResult(path, horizon, final == goal)


def find_first_conflict(paths: Sequence[SpaceTimePath]) -> Optional[Conflict]:
    """Earliest vertex or swap conflict; ties go to the smallest agent-id pair."""
    if len(paths) < 2:
        return None
    paths = sorted(paths, key=lambda p: p.agent_id)
    length = max(len(p.cells) for p in paths)
    padded = [p.padded(length).cells for p in paths]
    for t in range(length):
        for i in range(len(paths)):
            for j in range(i + 1, len(paths)):
                a, b = padded[i], padded[j]
                if a[t] == b[t]:
                    return Conflict(paths[i].agent_id, paths[j].agent_id, "vertex", t, a[t])
                if t > 0 and a[t] != a[t - 1] and a[t - 1] == b[t] and a[t] == b[t - 1]:
                    return Conflict(paths[i].agent_id, paths[j].agent_id, "edge", t, a[t], prev=a[t - 1])
    return None


def _split(conflict: Conflict) -> Tuple[Constraint, Constraint]:
    if conflict.kind == "vertex":
        return (
            Constraint(conflict.agent_a, conflict.cell, conflict.t),
            Constraint(conflict.agent_b, conflict.cell, conflict.t),
        )
    return (
        Constraint(conflict.agent_a, conflict.cell, conflict.t, prev=conflict.prev),
        Constraint(conflict.agent_b, conflict.prev, conflict.t, prev=conflict.cell),
    )


def cbs_solve(
    starts: Mapping[str, Cell],
    goals: Mapping[str, Cell],
    grid: GridMap,
    horizon: int,
    dynamic_obstacles: Optional[DynamicObstacles] = None,
    budget: Optional[int] = None,
) -> CbsSolution:
    """
    Conflict-free paths minimising the sum of objectives.

    Raises PlanningError when an agent has no path at all or the node budget
    runs out; the error carries the search statistics.
    """
    budget = CBS_NODE_BUDGET if budget is None else budget
    agents = list(starts)
    if len(set(starts.values())) != len(agents):
        raise PlanningError("agent start cells must be pairwise distinct")

    stats = CbsStats()
    began = time.perf_counter()
    length = horizon + 1

    def plan(agent_id: str, constraints: Tuple[Constraint, ...]) -> Optional[LowLevelResult]:
        return low_level_search(
            agent_id, starts[agent_id], goals[agent_id], constraints, grid, horizon, dynamic_obstacles, stats
        )

    root = ConflictTreeNode((), {}, {}, {})
    for agent_id in agents:
        result = plan(agent_id, ())
        if result is None:
            stats.wall_time = time.perf_counter() - began
            raise PlanningError(f"agent {agent_id} is unroutable", stats)
        root.paths[agent_id] = result.path.padded(length)
        root.objectives[agent_id] = result.objective
        root.reached[agent_id] = result.reached

    counter = itertools.count()
    open_list = [(root.cost, 0, next(counter), root)]
    while open_list:
        if stats.high_level_nodes_expanded >= budget:
            stats.wall_time = time.perf_counter() - began
            raise PlanningError(f"node budget of {budget} expansions exhausted", stats)
        _, _, _, node = heapq.heappop(open_list)
        stats.high_level_nodes_expanded += 1

        conflict = find_first_conflict([node.paths[a] for a in agents])
        if conflict is None:
            stats.wall_time = time.perf_counter() - began
            logger.debug(
                f"CBS solved {len(agents)} agents: cost {node.cost}, "
                f"{stats.high_level_nodes_expanded} nodes, {len(node.constraints)} constraints"
            )
            return CbsSolution(
                paths=dict(node.paths),
                objectives=dict(node.objectives),
                best_effort=frozenset(a for a in agents if not node.reached[a]),
                stats=stats,
            )

        for constraint in _split(conflict):
            constraints = node.constraints + (constraint,)
            result = plan(constraint.agent_id, constraints)
            if result is None:
                continue
            child = ConflictTreeNode(
                constraints,
                {**node.paths, constraint.agent_id: result.path.padded(length)},
                {**node.objectives, constraint.agent_id: result.objective},
                {**node.reached, constraint.agent_id: result.reached},
            )
            heapq.heappush(open_list, (child.cost, len(constraints), next(counter), child))

    stats.wall_time = time.perf_counter() - began
    raise PlanningError("no conflict-free plan exists within the horizon", stats)
