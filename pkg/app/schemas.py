from pydantic import BaseModel, ConfigDict, Field, StrictInt, model_validator
from typing import Any, Dict, List, Literal, Tuple

CellPair = Tuple[StrictInt, StrictInt]

TRACE_KINDS = ("move", "coverage", "assignment", "plan", "metric")


class FieldError(ValueError):
    """Validation failure attributed to a specific field path."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class FovEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    half_angle_deg: float = Field(45.0, gt=0, le=180)
    range_cells: float = Field(9.0, ge=1)


class ActorEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    track: List[CellPair] = Field(min_length=1)


class AgentEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    start: CellPair


class ScenarioFile(BaseModel):
    """On-disk scenario document. Unknown fields are rejected."""

    model_config = ConfigDict(extra="forbid")

    seed: StrictInt = Field(ge=0, lt=2**64)
    width: StrictInt = Field(ge=1)
    height: StrictInt = Field(ge=1)
    obstacles: List[CellPair] = []
    actors: List[ActorEntry] = Field(min_length=1)
    agents: List[AgentEntry] = Field(min_length=1)
    horizon_steps: StrictInt = Field(5, ge=1)
    step_seconds: float = Field(2.0, gt=0)
    execute_steps: StrictInt = Field(1, ge=1)
    fov: FovEntry = FovEntry()
    hysteresis: float = Field(0.0, ge=0)

    def _in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    @model_validator(mode="after")
    def check_world(self) -> "ScenarioFile":
        if self.execute_steps > self.horizon_steps:
            raise FieldError("execute_steps", f"must not exceed horizon_steps ({self.horizon_steps})")

        for i, cell in enumerate(self.obstacles):
            if not self._in_bounds(cell):
                raise FieldError(f"obstacles[{i}]", f"cell {list(cell)} is outside the map")
        blocked = set(self.obstacles)

        seen_ids = set()
        track_length = len(self.actors[0].track)
        for i, actor in enumerate(self.actors):
            if actor.id in seen_ids:
                raise FieldError(f"actors[{i}].id", f"duplicate actor id {actor.id!r}")
            seen_ids.add(actor.id)
            if len(actor.track) != track_length:
                raise FieldError(
                    f"actors[{i}].track",
                    f"length {len(actor.track)} differs from the first track ({track_length})",
                )
            for j, cell in enumerate(actor.track):
                if not self._in_bounds(cell):
                    raise FieldError(f"actors[{i}].track[{j}]", f"cell {list(cell)} is outside the map")
                if cell in blocked:
                    raise FieldError(f"actors[{i}].track[{j}]", f"cell {list(cell)} is an obstacle")
                if j > 0:
                    prev = actor.track[j - 1]
                    if abs(cell[0] - prev[0]) + abs(cell[1] - prev[1]) > 1:
                        raise FieldError(f"actors[{i}].track[{j}]", "moves more than one 4-connected step")

        actor_starts = {actor.track[0] for actor in self.actors}
        starts = set()
        for i, agent in enumerate(self.agents):
            if agent.id in seen_ids:
                raise FieldError(f"agents[{i}].id", f"duplicate id {agent.id!r}")
            seen_ids.add(agent.id)
            cell = agent.start
            if not self._in_bounds(cell):
                raise FieldError(f"agents[{i}].start", f"cell {list(cell)} is outside the map")
            if cell in blocked:
                raise FieldError(f"agents[{i}].start", f"cell {list(cell)} is an obstacle")
            if cell in starts:
                raise FieldError(f"agents[{i}].start", f"cell {list(cell)} is shared with another agent")
            if cell in actor_starts:
                raise FieldError(f"agents[{i}].start", f"cell {list(cell)} is an actor start")
            starts.add(cell)
        return self


class TraceRecord(BaseModel):
    """One line of a trace file."""

    model_config = ConfigDict(extra="forbid")

    t: StrictInt = Field(ge=0)
    kind: Literal["move", "coverage", "assignment", "plan", "metric"]
    payload: Dict[str, Any]
