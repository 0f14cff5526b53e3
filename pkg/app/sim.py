"""
Receding-horizon simulation loop.

Each epoch projects viewpoints around every actor's position at the end of the
planning window, keeps those that see the actor throughout the window,
(re)assigns agents, plans conflict-free paths for the whole horizon, executes
the first `execute_steps` of them and logs what happened. States are
immutable: every epoch returns a new SimState.
"""

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .assignment import Assignment, assign, reassign
from .cbs import SpaceTimePath, cbs_solve, path_cost
from .config import CBS_NODE_BUDGET
from .coverage import covers, coverage_report, quantize_yaw
from .errors import PlanningError
from .scenario import Cell, ScenarioConfig, actor_position_at, check_scenario
from .trace import TraceEvent
from .viewpoints import DISTANCE_CELLS, feasible_viewpoints

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunOptions:
    """Run-time knobs that are not part of the scenario document."""

    strategy: str = "optimal"
    budget: int = CBS_NODE_BUDGET
    record_timing: bool = True
    distance_cells: Tuple[int, ...] = DISTANCE_CELLS


@dataclass(frozen=True)
class SimState:
    t: int
    agent_cells: Dict[str, Cell]
    agent_facings: Dict[str, int]
    actor_cells: Dict[str, Cell]
    assignment: Optional[Assignment] = None
    histories: Dict[str, Tuple[Cell, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class RunMetrics:
    actors_total_cost: float = 0.0
    agents_total_cost: float = 0.0
    agents_total_objective: int = 0
    nodes_expanded: int = 0
    low_level_expansions: int = 0
    initial_viewpoints: int = 0
    tracking_accuracy: float = 0.0
    empty_run: bool = True
    epochs: int = 0
    hold_events: int = 0
    swap_events: int = 0
    completion_time_s: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RunResult:
    trace: Tuple[TraceEvent, ...]
    metrics: RunMetrics
    histories: Dict[str, Tuple[Cell, ...]]
    metric_event: TraceEvent

    def records(self) -> List[TraceEvent]:
        """Events as written to a trace file: the epoch events, then the metric record."""
        return list(self.trace) + [self.metric_event]


def _xy(cell: Cell) -> List[int]:
    return [cell[0], cell[1]]


def initial_state(cfg: ScenarioConfig) -> SimState:
    agent_cells = {d.agent_id: d.cell for d in cfg.agents}
    return SimState(
        t=0,
        agent_cells=agent_cells,
        agent_facings={d.agent_id: 0 for d in cfg.agents},
        actor_cells={a.actor_id: actor_position_at(a, 0) for a in cfg.actors},
        assignment=None,
        histories={agent_id: (cell,) for agent_id, cell in agent_cells.items()},
    )


def _assignment_payload(
    assignment: Assignment, agent_cells: Dict[str, Cell], adopted: bool, swapped: bool
) -> Dict[str, Any]:
    return {
        "tuples": [
            {
                "actor": e.actor_id,
                "agent": e.agent_id,
                "cell": _xy(e.viewpoint.cell),
                "facing": e.viewpoint.facing_idx,
                "yaw_idx": e.viewpoint.source.yaw_idx,
                "tilt_idx": e.viewpoint.source.tilt_idx,
                "dist_idx": e.viewpoint.source.dist_idx,
            }
            for e in assignment.tuples
        ],
        "uncoverable": list(assignment.uncoverable),
        "idle": list(assignment.idle),
        "adopted_fresh": adopted,
        "swapped": swapped,
        "total_cost": assignment.total_cost(agent_cells),
    }


def step_epoch(
    state: SimState, cfg: ScenarioConfig, options: RunOptions = RunOptions()
) -> Tuple[SimState, List[TraceEvent]]:
    """
    Plan one horizon from `state` and execute its first steps.

    Returns the new state and the events of the epoch in trace order. A failed
    CBS solve leaves every agent holding position for the executed steps.
    """
    run_length = cfg.run_length
    if state.t >= run_length:
        return state, []

    t = state.t
    horizon = cfg.horizon_steps
    steps = min(cfg.execute_steps, run_length - t)
    grid = cfg.map

    # Goal anticipation: viewpoints around where each actor will be at t + H
    targets = {a.actor_id: actor_position_at(a, t + horizon) for a in cfg.actors}
    # Viewpoints must keep each actor in view over t+1..t+H
    window = {a.actor_id: tuple(actor_position_at(a, t + k) for k in range(1, horizon + 1)) for a in cfg.actors}
    fresh = assign(state.agent_cells, targets, grid, cfg.fov, options.strategy, options.distance_cells, window)
    assignment, adopted = reassign(
        state.assignment, fresh, state.agent_cells, targets, grid, cfg.hysteresis, cfg.fov,
        options.distance_cells, window,
    )
    swapped = (
        adopted
        and state.assignment is not None
        and state.assignment.actor_of() != assignment.actor_of()
    )
    events = [
        TraceEvent(t, "assignment", _assignment_payload(assignment, state.agent_cells, adopted, swapped)),
    ]

    goals = dict(state.agent_cells)
    goals.update(assignment.goals())
    dynamic = {
        k: frozenset(actor_position_at(a, t + k) for a in cfg.actors)
        for k in range(1, horizon + 1)
    }
    try:
        solution = cbs_solve(state.agent_cells, goals, grid, horizon, dynamic, options.budget)
        paths = {agent_id: p.cells for agent_id, p in solution.paths.items()}
        stats = solution.stats
        plan = {
            "status": "ok",
            "goals": {agent_id: _xy(cell) for agent_id, cell in goals.items()},
            "paths": {agent_id: [_xy(c) for c in cells] for agent_id, cells in paths.items()},
            "objectives": dict(solution.objectives),
            "best_effort": sorted(solution.best_effort),
            "sum_of_objectives": solution.cost,
        }
    except PlanningError as exc:
        logger.warning(f"t={t}: planning failed ({exc.detail}); agents hold position")
        paths = {agent_id: (cell,) * (horizon + 1) for agent_id, cell in state.agent_cells.items()}
        stats = exc.stats
        plan = {
            "status": "hold",
            "reason": exc.detail,
            "goals": {agent_id: _xy(cell) for agent_id, cell in goals.items()},
        }
    plan["high_level_nodes_expanded"] = stats.high_level_nodes_expanded if stats else 0
    plan["low_level_expansions"] = stats.low_level_expansions if stats else 0
    plan["wall_time_s"] = stats.wall_time if stats and options.record_timing else 0.0
    events.append(TraceEvent(t, "plan", plan))

    cells = dict(state.agent_cells)
    facings = dict(state.agent_facings)
    histories = dict(state.histories)
    actor_cells = dict(state.actor_cells)
    owners = assignment.actor_of()
    for s in range(1, steps + 1):
        now = t + s
        actor_cells = {a.actor_id: actor_position_at(a, now) for a in cfg.actors}
        for agent_id in sorted(cells):
            prev = cells[agent_id]
            cell = paths[agent_id][min(s, len(paths[agent_id]) - 1)]
            actor_id = owners.get(agent_id)
            if actor_id is not None and cell != actor_cells[actor_id]:
                facings[agent_id] = quantize_yaw(cell, actor_cells[actor_id])
            cells[agent_id] = cell
            histories[agent_id] = histories.get(agent_id, (prev,)) + (cell,)
            events.append(TraceEvent(now, "move", {
                "agent": agent_id,
                "from": _xy(prev),
                "cell": _xy(cell),
                "facing": facings[agent_id],
            }))

        agents_view = {}
        covered = set()
        for agent_id in sorted(cells):
            actor_id = owners.get(agent_id)
            hit = actor_id is not None and covers(
                cells[agent_id], facings[agent_id], actor_cells[actor_id], cfg.fov, grid
            )
            if hit:
                covered.add(actor_id)
            agents_view[agent_id] = {
                "cell": _xy(cells[agent_id]),
                "facing": facings[agent_id],
                "actor": actor_id,
                "covered": hit,
            }
        events.append(TraceEvent(now, "coverage", {
            "actors": {actor_id: _xy(c) for actor_id, c in actor_cells.items()},
            "agents": agents_view,
            "covered": sorted(covered),
            "count": len(covered),
        }))

    logger.debug(f"epoch t={t}: {len(assignment.tuples)} assigned, plan {plan['status']}, executed {steps} steps")
    new_state = SimState(
        t=t + steps,
        agent_cells=cells,
        agent_facings=facings,
        actor_cells=actor_cells,
        assignment=assignment,
        histories=histories,
    )
    return new_state, events


def _initial_viewpoints(cfg: ScenarioConfig, options: RunOptions) -> int:
    occupied = frozenset(actor_position_at(a, 0) for a in cfg.actors)
    return sum(
        len(feasible_viewpoints(a.actor_id, actor_position_at(a, 0), cfg.map, cfg.fov, occupied, options.distance_cells))
        for a in cfg.actors
    )


def run(cfg: ScenarioConfig, options: RunOptions = RunOptions()) -> RunResult:
    """Simulate the whole scenario. Identical inputs give identical traces (timing aside)."""
    check_scenario(cfg)
    began = time.perf_counter()
    logger.info(
        f"Run started: seed {cfg.seed}, {len(cfg.agents)} agents, {len(cfg.actors)} actors, "
        f"{cfg.run_length} steps, strategy {options.strategy}"
    )

    state = initial_state(cfg)
    events: List[TraceEvent] = []
    epochs = 0
    while state.t < cfg.run_length:
        state, epoch_events = step_epoch(state, cfg, options)
        events.extend(epoch_events)
        epochs += 1
    elapsed = time.perf_counter() - began

    plans = [e.payload for e in events if e.kind == "plan"]
    report = coverage_report(events)
    metrics = RunMetrics(
        actors_total_cost=sum(path_cost(SpaceTimePath(a.actor_id, a.positions)) for a in cfg.actors),
        agents_total_cost=sum(path_cost(SpaceTimePath(d, cells)) for d, cells in state.histories.items()),
        agents_total_objective=sum(p.get("sum_of_objectives", 0) for p in plans),
        nodes_expanded=sum(p["high_level_nodes_expanded"] for p in plans),
        low_level_expansions=sum(p["low_level_expansions"] for p in plans),
        initial_viewpoints=_initial_viewpoints(cfg, options),
        tracking_accuracy=report.tracking_accuracy,
        empty_run=report.empty_run,
        epochs=epochs,
        hold_events=sum(p["status"] == "hold" for p in plans),
        swap_events=sum(bool(e.payload["swapped"]) for e in events if e.kind == "assignment"),
        completion_time_s=elapsed if options.record_timing else 0.0,
    )
    metric_event = TraceEvent(cfg.run_length, "metric", {
        "metrics": metrics.to_dict(),
        "map": {
            "width": cfg.map.width,
            "height": cfg.map.height,
            "obstacles": [_xy(c) for c in sorted(cfg.map.obstacles)],
        },
        "fov": {"half_angle_deg": cfg.fov.half_angle_deg, "range_cells": cfg.fov.range_cells},
        "agents": [d.agent_id for d in cfg.agents],
        "actors": [a.actor_id for a in cfg.actors],
    })
    logger.info(
        f"Run finished: accuracy {metrics.tracking_accuracy:.1f}%, "
        f"{metrics.nodes_expanded} nodes expanded, {metrics.hold_events} holds"
    )
    return RunResult(tuple(events), metrics, dict(state.histories), metric_event)
