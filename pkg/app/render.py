"""
SVG frame rendering of a run trace.

One frame per coverage record: squares are obstacles, stars are actors,
circles are agents, and a translucent pie sector shows each agent's field of
view. A covered actor's star is outlined in the colour of an agent covering it.
"""

import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from jinja2 import Environment, FileSystemLoader

from .config import SVG_CELL_PX
from .coverage import YAW_STEP
from .errors import TraceFormatError
from .trace import TraceEvent, metric_record

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
UNCOVERED_STROKE = "#000000"

env = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=True,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _num(value: float) -> str:
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


class FrameGeometry:
    """Grid-to-pixel mapping; the grid's y axis points up, SVG's points down."""

    def __init__(self, width: int, height: int, cell_px: int):
        self.width = width
        self.height = height
        self.cell_px = cell_px

    def center(self, cell: Sequence[int]) -> Tuple[float, float]:
        return (cell[0] + 0.5) * self.cell_px, (self.height - cell[1] - 0.5) * self.cell_px

    def star(self, cell: Sequence[int]) -> str:
        cx, cy = self.center(cell)
        outer, inner = 0.45 * self.cell_px, 0.18 * self.cell_px
        points = []
        for k in range(10):
            radius = outer if k % 2 == 0 else inner
            angle = math.radians(-90 + 36 * k)
            points.append(f"{_num(cx + radius * math.cos(angle))},{_num(cy + radius * math.sin(angle))}")
        return " ".join(points)

    def sector(self, cell: Sequence[int], facing_idx: int, half_angle_deg: float, range_cells: float) -> Dict:
        cx, cy = self.center(cell)
        r = range_cells * self.cell_px
        if half_angle_deg >= 180:
            return {"full": True, "cx": _num(cx), "cy": _num(cy), "r": _num(r)}
        heading = facing_idx * YAW_STEP
        half = math.radians(half_angle_deg)

        def rim(angle: float) -> str:
            return f"{_num(cx + r * math.cos(angle))} {_num(cy - r * math.sin(angle))}"

        large = 1 if 2 * half_angle_deg > 180 else 0
        # Visually counter-clockwise arcs use SVG's negative-angle sweep (flag 0)
        d = f"M {_num(cx)} {_num(cy)} L {rim(heading - half)} A {_num(r)} {_num(r)} 0 {large} 0 {rim(heading + half)} Z"
        return {"full": False, "d": d}


def render_frame(event: TraceEvent, meta: TraceEvent, colors: Dict[str, str], cell_px: int = SVG_CELL_PX) -> str:
    """SVG text for a single coverage record."""
    world = meta.payload["map"]
    fov = meta.payload["fov"]
    geo = FrameGeometry(world["width"], world["height"], cell_px)

    obstacles = []
    for cell in world["obstacles"]:
        cx, cy = geo.center(cell)
        obstacles.append({"x": _num(cx - cell_px / 2), "y": _num(cy - cell_px / 2), "size": cell_px})

    agents, sectors = [], []
    coverer: Dict[str, str] = {}
    for agent_id, view in sorted(event.payload["agents"].items()):
        cx, cy = geo.center(view["cell"])
        color = colors.get(agent_id, PALETTE[0])
        agents.append({"id": agent_id, "cx": _num(cx), "cy": _num(cy), "r": _num(0.35 * cell_px), "color": color})
        wedge = geo.sector(view["cell"], view["facing"], fov["half_angle_deg"], fov["range_cells"])
        sectors.append({"agent": agent_id, "color": color, **wedge})
        if view["covered"] and view["actor"] is not None:
            coverer.setdefault(view["actor"], color)

    actors = []
    for actor_id, cell in sorted(event.payload["actors"].items()):
        actors.append({
            "id": actor_id,
            "points": geo.star(cell),
            "stroke": coverer.get(actor_id, UNCOVERED_STROKE),
            "stroke_width": 3 if actor_id in coverer else 1,
        })

    template = env.get_template("frame.svg.j2")
    return template.render(
        t=event.t,
        width=world["width"] * cell_px,
        height=world["height"] * cell_px,
        obstacles=obstacles,
        sectors=sectors,
        actors=actors,
        agents=agents,
    )


def render_trace(
    events: Iterable[TraceEvent], out_dir: Union[str, Path], cell_px: int = SVG_CELL_PX
) -> List[Path]:
    """Write frame_<t>.svg for every coverage record. An empty trace writes nothing."""
    events = list(events)
    frames = sorted((e for e in events if e.kind == "coverage"), key=lambda e: e.t)
    if not frames:
        logger.warning("Trace has no coverage records; no frames rendered")
        return []
    meta = metric_record(events)
    if meta is None:
        raise TraceFormatError("trace has no metric record (map and FOV are unknown)")

    agent_ids = meta.payload.get("agents") or sorted(frames[0].payload["agents"])
    colors = {agent_id: PALETTE[i % len(PALETTE)] for i, agent_id in enumerate(agent_ids)}

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for event in frames:
        path = out / f"frame_{event.t:04d}.svg"
        path.write_text(render_frame(event, meta, colors, cell_px))
        written.append(path)
    logger.info(f"Rendered {len(written)} frames to {out}")
    return written
