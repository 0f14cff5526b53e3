"""
Run trace records.

A trace is newline-delimited JSON, one `{t, kind, payload}` object per event,
ordered by (t, kind rank, agent id). The last line is the `metric` record.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from pydantic import ValidationError

from .errors import TraceFormatError
from .schemas import TRACE_KINDS, TraceRecord

logger = logging.getLogger(__name__)

KIND_RANK = {kind: rank for rank, kind in enumerate(TRACE_KINDS)}

# Wall-clock fields; excluded from digests
TIMING_FIELDS = ("completion_time_s", "wall_time_s")


@dataclass(frozen=True)
class TraceEvent:
    t: int
    kind: str
    payload: Dict[str, Any] = field(compare=True, hash=False)

    @property
    def agent_id(self) -> str:
        return self.payload.get("agent") or ""

    def sort_key(self) -> Tuple[int, int, str]:
        return self.t, KIND_RANK[self.kind], self.agent_id

    def to_record(self) -> Dict[str, Any]:
        return {"t": self.t, "kind": self.kind, "payload": self.payload}


def _strip_timing(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _strip_timing(v) for k, v in value.items() if k not in TIMING_FIELDS}
    if isinstance(value, list):
        return [_strip_timing(v) for v in value]
    return value


def dumps_event(event: TraceEvent) -> str:
    return json.dumps(event.to_record(), separators=(",", ":"))


def trace_digest(events: Iterable[TraceEvent]) -> str:
    """SHA-256 over the canonical event lines, ignoring wall-clock fields."""
    digest = hashlib.sha256()
    for event in events:
        record = _strip_timing(event.to_record())
        digest.update(json.dumps(record, separators=(",", ":"), sort_keys=True).encode())
        digest.update(b"\n")
    return digest.hexdigest()


def write_trace(events: Iterable[TraceEvent], path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for event in events:
            fh.write(dumps_event(event) + "\n")
    logger.info(f"Trace written to {path}")
    return path


def read_trace(path: Union[str, Path]) -> List[TraceEvent]:
    """Parse a trace file; the first malformed line raises TraceFormatError."""
    path = Path(path)
    if not path.is_file():
        raise TraceFormatError(f"trace file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise TraceFormatError(f"trace file is not UTF-8 text: {exc.reason} at byte {exc.start}") from exc
    events = []
    for number, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = TraceRecord.model_validate_json(line)
        except ValidationError as exc:
            err = exc.errors()[0]
            where = ".".join(str(p) for p in err["loc"])
            raise TraceFormatError(f"{where}: {err['msg']}" if where else err["msg"], line=number) from exc
        events.append(TraceEvent(record.t, record.kind, record.payload))
    return events


def metric_record(events: Iterable[TraceEvent]) -> Optional[TraceEvent]:
    found = None
    for event in events:
        if event.kind == "metric":
            found = event
    return found
