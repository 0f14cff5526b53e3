"""Shared fixtures for the planner tests."""

import pytest

from app.scenario import ActorTrack, AgentStart, FovModel, GridMap, ScenarioConfig


def static_scenario(width, height, actors, agents, length, obstacles=(), **kwargs) -> ScenarioConfig:
    """Scenario whose actors stand still for `length` steps."""
    return ScenarioConfig(
        seed=kwargs.pop("seed", 0),
        map=GridMap(width, height, frozenset(obstacles)),
        actors=tuple(ActorTrack(actor_id, (cell,) * (length + 1)) for actor_id, cell in actors),
        agents=tuple(AgentStart(agent_id, cell) for agent_id, cell in agents),
        **kwargs,
    )


@pytest.fixture
def empty_grid():
    return GridMap(20, 20)


@pytest.fixture
def fov():
    return FovModel()


@pytest.fixture
def corridor_scenario():
    """
    Two static actors on a 40x21 map with one agent far out on each side.

    Each agent's nearest viewpoint lies 4 cells straight ahead, 8 cells short
    of its actor: (4, 10) for d01 and (35, 10) for d02.
    """
    return static_scenario(
        40, 21,
        actors=[("a01", (12, 10)), ("a02", (27, 10))],
        agents=[("d01", (0, 10)), ("d02", (39, 10))],
        length=8,
    )


@pytest.fixture
def moving_actor_scenario():
    """A single actor walking east along row 7 of an empty 15x15 map."""
    track = tuple((2 + t, 7) for t in range(11))
    return ScenarioConfig(
        seed=0,
        map=GridMap(15, 15),
        actors=(ActorTrack("a01", track),),
        agents=(AgentStart("d01", (0, 0)),),
    )
