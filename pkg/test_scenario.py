"""Scenario generation, validation and file round trips."""

import json
import math

import pytest

from app.coverage import line_of_sight
from app.errors import GenerationError, ScenarioValidationError
from app.scenario import (
    ActorTrack,
    AgentStart,
    LAUNCH_RADIUS,
    GridMap,
    ScenarioConfig,
    actor_position_at,
    check_scenario,
    dumps_scenario,
    generate_random_scenario,
    load_scenario,
    loads_scenario,
    save_scenario,
)


def _manhattan(a, b):
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def test_generation_is_deterministic():
    first = generate_random_scenario(7, 20, 20, 0.10, 3, 3, 30)
    second = generate_random_scenario(7, 20, 20, 0.10, 3, 3, 30)
    assert first == second
    assert dumps_scenario(first) == dumps_scenario(second)


def test_different_seeds_give_different_worlds():
    a = generate_random_scenario(1, 20, 20, 0.10, 3, 3, 30)
    b = generate_random_scenario(2, 20, 20, 0.10, 3, 3, 30)
    assert a.map.obstacles != b.map.obstacles


def test_generated_scenario_satisfies_invariants():
    cfg = generate_random_scenario(11, 20, 20, 0.15, 4, 5, 25)
    assert len(cfg.map.obstacles) == round(0.15 * 400)
    assert cfg.run_length == 25
    assert [a.actor_id for a in cfg.actors] == ["a01", "a02", "a03", "a04"]
    assert [d.agent_id for d in cfg.agents] == ["d01", "d02", "d03", "d04", "d05"]

    for track in cfg.actors:
        assert len(track.positions) == 26
        for prev, cell in zip(track.positions, track.positions[1:]):
            assert _manhattan(prev, cell) <= 1
            assert cfg.map.is_free(cell)

    starts = [d.cell for d in cfg.agents]
    assert len(set(starts)) == len(starts)
    actor_starts = {t.positions[0] for t in cfg.actors}
    assert not actor_starts & set(starts)
    assert all(cfg.map.is_free(c) for c in starts)
    check_scenario(cfg)


def test_each_agent_launches_in_view_of_its_own_actor():
    for seed in range(5):
        cfg = generate_random_scenario(seed, 20, 20, 0.15, 3, 5, 10)
        for i, agent in enumerate(cfg.agents):
            home = cfg.actors[i % 3].positions[0]
            assert math.dist(agent.cell, home) <= LAUNCH_RADIUS
            assert line_of_sight(cfg.map, agent.cell, home)


def test_negative_seed_is_a_generation_error():
    with pytest.raises(GenerationError, match="seed"):
        generate_random_scenario(-1, 10, 10, 0.1, 1, 1, 5)


def test_zero_density_has_no_obstacles():
    cfg = generate_random_scenario(3, 10, 10, 0.0, 1, 1, 5)
    assert cfg.map.obstacles == frozenset()


def test_overfull_map_is_a_generation_error():
    with pytest.raises(GenerationError):
        generate_random_scenario(0, 2, 2, 0.5, 2, 2, 5)


def test_density_above_limit_is_rejected():
    with pytest.raises(GenerationError):
        generate_random_scenario(0, 3, 3, 0.9, 1, 1, 5)


def test_actor_position_clamps_to_track_ends():
    track = ActorTrack("a01", ((0, 0), (1, 0), (2, 0)))
    assert actor_position_at(track, -3) == (0, 0)
    assert actor_position_at(track, 1) == (1, 0)
    assert actor_position_at(track, 99) == (2, 0)


def test_file_round_trip(tmp_path):
    cfg = generate_random_scenario(5, 12, 12, 0.1, 2, 2, 10)
    path = save_scenario(cfg, tmp_path / "scenario.json")
    assert load_scenario(path) == cfg


def test_missing_file_is_a_validation_error(tmp_path):
    with pytest.raises(ScenarioValidationError):
        load_scenario(tmp_path / "nope.json")


def test_binary_file_is_a_validation_error(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_bytes(b"\xff\xfe\x00garbage")
    with pytest.raises(ScenarioValidationError, match="UTF-8"):
        load_scenario(path)


def _document(**overrides):
    doc = {
        "seed": 1,
        "width": 5,
        "height": 5,
        "obstacles": [[2, 2]],
        "actors": [{"id": "a01", "track": [[0, 0], [1, 0], [1, 1]]}],
        "agents": [{"id": "d01", "start": [4, 4]}],
    }
    doc.update(overrides)
    return json.dumps(doc)


def test_minimal_document_loads_with_defaults():
    cfg = loads_scenario(_document())
    assert cfg.horizon_steps == 5
    assert cfg.execute_steps == 1
    assert cfg.step_seconds == 2.0
    assert cfg.fov.half_angle_deg == 45.0
    assert cfg.run_length == 2


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"actors": [{"id": "a01", "track": [[0, 0], [2, 0]]}]}, "actors[0].track[1]"),
        ({"actors": [{"id": "a01", "track": [[0, 0], [9, 0]]}]}, "actors[0].track[1]"),
        ({"actors": [{"id": "a01", "track": [[2, 2]]}]}, "actors[0].track[0]"),
        ({"agents": [{"id": "d01", "start": [0, 0]}]}, "agents[0].start"),
        ({"agents": [{"id": "d01", "start": [4, 4]}, {"id": "d02", "start": [4, 4]}]}, "agents[1].start"),
        ({"agents": [{"id": "a01", "start": [4, 4]}]}, "agents[0].id"),
        ({"obstacles": [[7, 7]]}, "obstacles[0]"),
        ({"execute_steps": 6}, "execute_steps"),
    ],
)
def test_invalid_documents_name_the_field(overrides, field):
    with pytest.raises(ScenarioValidationError) as excinfo:
        loads_scenario(_document(**overrides))
    assert excinfo.value.field == field
    assert str(excinfo.value).startswith(field)


def test_unequal_track_lengths_are_rejected():
    doc = _document(actors=[
        {"id": "a01", "track": [[0, 0], [1, 0]]},
        {"id": "a02", "track": [[0, 4]]},
    ])
    with pytest.raises(ScenarioValidationError) as excinfo:
        loads_scenario(doc)
    assert excinfo.value.field == "actors[1].track"


def test_unknown_fields_are_rejected():
    with pytest.raises(ScenarioValidationError):
        loads_scenario(_document(wind_speed=3))


def test_check_scenario_rejects_in_memory_violations():
    cfg = ScenarioConfig(
        seed=0,
        map=GridMap(4, 4, frozenset({(1, 1)})),
        actors=(ActorTrack("a01", ((0, 0),)),),
        agents=(AgentStart("d01", (1, 1)),),
    )
    with pytest.raises(ScenarioValidationError):
        check_scenario(cfg)
