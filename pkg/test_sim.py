"""Receding-horizon simulation runs."""

import pytest

from app.cbs import SpaceTimePath, path_cost
from app.coverage import covers, quantize_yaw
from app.scenario import actor_position_at, generate_random_scenario
from app.sim import RunOptions, initial_state, run, step_epoch
from app.trace import trace_digest

from conftest import static_scenario


def find_conflicts(histories):
    """Independent scan of executed trajectories for vertex and swap conflicts."""
    found = []
    agents = sorted(histories)
    length = max(len(h) for h in histories.values())
    for t in range(length):
        for i, a in enumerate(agents):
            for b in agents[i + 1:]:
                ha, hb = histories[a], histories[b]
                if ha[t] == hb[t]:
                    found.append(("vertex", t, a, b))
                if t and ha[t] != ha[t - 1] and ha[t - 1] == hb[t] and ha[t] == hb[t - 1]:
                    found.append(("edge", t, a, b))
    return found


def test_corridor_run_costs_and_accuracy(corridor_scenario):
    result = run(corridor_scenario)
    m = result.metrics
    assert m.agents_total_cost == 8.0
    assert m.actors_total_cost == 0.0
    assert m.epochs == 8
    assert m.hold_events == 0
    assert m.swap_events == 0
    # Both agents enter filming range at t=3 and stay covered
    assert m.tracking_accuracy == 75.0
    assert result.histories["d01"][-1] == (4, 10)
    assert result.histories["d02"][-1] == (35, 10)
    assert m.nodes_expanded >= m.epochs


def test_agents_total_cost_matches_executed_histories(corridor_scenario):
    result = run(corridor_scenario)
    total = sum(path_cost(SpaceTimePath(d, cells)) for d, cells in result.histories.items())
    assert result.metrics.agents_total_cost == total


def test_zero_length_run_is_empty():
    cfg = static_scenario(10, 10, [("a01", (5, 5))], [("d01", (0, 0))], length=0)
    result = run(cfg)
    assert result.trace == ()
    assert result.metrics.agents_total_cost == 0.0
    assert result.metrics.actors_total_cost == 0.0
    assert result.metrics.epochs == 0
    assert result.records()[-1].kind == "metric"


def test_static_world_reaches_a_fixed_point():
    cfg = static_scenario(20, 20, [("a01", (10, 10))], [("d01", (8, 10))], length=4)
    result = run(cfg)
    assert result.metrics.agents_total_cost == 0.0
    assert all(cell == (8, 10) for cell in result.histories["d01"])
    assert result.metrics.tracking_accuracy == 100.0


def test_events_are_in_trace_order(corridor_scenario):
    events = list(run(corridor_scenario).trace)
    assert events == sorted(events, key=lambda e: e.sort_key())
    kinds = [e.kind for e in events if e.t == 0]
    assert kinds == ["assignment", "plan"]


def test_coverage_is_logged_once_per_timestep(corridor_scenario):
    result = run(corridor_scenario)
    coverage = [e.t for e in result.trace if e.kind == "coverage"]
    assert coverage == list(range(1, 9))
    moves = [e for e in result.trace if e.kind == "move" and e.t == 1]
    assert [e.agent_id for e in moves] == ["d01", "d02"]


def test_runs_are_deterministic():
    cfg = generate_random_scenario(3, 12, 12, 0.1, 2, 2, 8)
    digests = {trace_digest(run(cfg).records()) for _ in range(3)}
    assert len(digests) == 1


def test_no_timing_zeroes_wall_clock(corridor_scenario):
    result = run(corridor_scenario, RunOptions(record_timing=False))
    assert result.metrics.completion_time_s == 0.0
    assert all(e.payload["wall_time_s"] == 0.0 for e in result.trace if e.kind == "plan")


def test_exhausted_budget_holds_every_agent(corridor_scenario):
    result = run(corridor_scenario, RunOptions(budget=0))
    assert result.metrics.hold_events == result.metrics.epochs == 8
    assert result.metrics.agents_total_cost == 0.0
    assert result.histories["d01"] == ((0, 10),) * 9
    plans = [e for e in result.trace if e.kind == "plan"]
    assert all(p.payload["status"] == "hold" for p in plans)


def test_trapped_agent_waits_in_place():
    cfg = static_scenario(
        20, 20, [("a01", (15, 15))], [("d01", (0, 0))], length=5, obstacles={(1, 0), (0, 1)}
    )
    result = run(cfg)
    assert set(result.histories["d01"]) == {(0, 0)}
    assert result.metrics.tracking_accuracy < 100.0
    plan = next(e for e in result.trace if e.kind == "plan")
    assert plan.payload["best_effort"] == ["d01"]


def test_agent_follows_a_moving_actor(moving_actor_scenario):
    result = run(moving_actor_scenario)
    track = moving_actor_scenario.actors[0].positions
    history = result.histories["d01"]
    assert result.metrics.hold_events == 0
    for t, cell in enumerate(history):
        assert cell != track[t]
    # Once caught up the agent keeps the actor in view
    coverage = [e for e in result.trace if e.kind == "coverage"]
    assert coverage[-1].payload["count"] == 1
    assert result.metrics.tracking_accuracy > 0.0


def test_goals_keep_a_moving_actor_in_view_over_the_window(moving_actor_scenario):
    cfg = moving_actor_scenario
    track = cfg.actors[0]
    result = run(cfg)
    assignments = [e for e in result.trace if e.kind == "assignment"]
    assert assignments
    for event in assignments:
        window = [actor_position_at(track, event.t + k) for k in range(1, cfg.horizon_steps + 1)]
        for entry in event.payload["tuples"]:
            cell = tuple(entry["cell"])
            assert cell not in window
            for target in window:
                assert covers(cell, quantize_yaw(cell, target), target, cfg.fov, cfg.map)


def test_full_horizon_execution_takes_fewer_epochs():
    cfg = static_scenario(
        20, 20, [("a01", (10, 10))], [("d01", (0, 0))], length=10, horizon_steps=5, execute_steps=5
    )
    assert run(cfg).metrics.epochs == 2


def test_step_epoch_past_the_end_is_a_no_op(corridor_scenario):
    state = initial_state(corridor_scenario)
    for _ in range(8):
        state, _ = step_epoch(state, corridor_scenario)
    assert state.t == 8
    same, events = step_epoch(state, corridor_scenario)
    assert same is state and events == []


def test_step_epoch_does_not_mutate_its_input(corridor_scenario):
    state = initial_state(corridor_scenario)
    before = dict(state.agent_cells)
    new_state, _ = step_epoch(state, corridor_scenario)
    assert state.agent_cells == before
    assert state.t == 0 and new_state.t == 1


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_executed_trajectories_are_conflict_free(seed):
    cfg = generate_random_scenario(seed, 20, 20, 0.05 * (seed % 5), 3, 3, 15)
    result = run(cfg)
    assert find_conflicts(result.histories) == []
    for cells in result.histories.values():
        assert all(cfg.map.is_free(c) for c in cells)
        for prev, cell in zip(cells, cells[1:]):
            assert abs(prev[0] - cell[0]) + abs(prev[1] - cell[1]) <= 1


@pytest.mark.slow
def test_conflict_freedom_fuzz():
    for i in range(200):
        size = (2, 3, 5)[i % 3]
        density = (0.0, 0.05, 0.10, 0.15, 0.20)[i % 5]
        cfg = generate_random_scenario(1000 + i, 20, 20, density, size, size, 20)
        result = run(cfg)
        assert find_conflicts(result.histories) == [], f"seed {1000 + i}"
