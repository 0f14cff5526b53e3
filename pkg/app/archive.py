"""Archive of bench rows in an async SQLAlchemy database."""

import asyncio
import logging
from typing import Iterable, List, Optional

from sqlalchemy import select

from .bench import BenchRow
from .database import init_db, make_session_factory
from .models import BenchRun

logger = logging.getLogger(__name__)


async def record_bench_rows(rows: Iterable[BenchRow], strategy: str = "optimal", url: Optional[str] = None) -> int:
    """Insert one BenchRun per row; returns the number stored."""
    engine, session_factory = make_session_factory(url)
    try:
        await init_db(engine)
        async with session_factory() as db:
            stored = 0
            for row in rows:
                db.add(BenchRun(
                    strategy=strategy,
                    seed=row.seed,
                    agents=row.agents,
                    actors=row.actors,
                    initial_viewpoints=row.initial_viewpoints,
                    obstacle_density_pct=row.obstacle_density_pct,
                    actors_total_cost=row.actors_total_cost,
                    agents_total_cost=row.agents_total_cost,
                    nodes_expanded=row.nodes_expanded,
                    tracking_accuracy_pct=row.tracking_accuracy_pct,
                    completion_time_s=row.completion_time_s,
                ))
                stored += 1
            await db.commit()
    finally:
        await engine.dispose()
    logger.info(f"Archived {stored} bench rows")
    return stored


async def list_bench_runs(url: Optional[str] = None, limit: int = 50) -> List[dict]:
    """Most recent archived rows first."""
    engine, session_factory = make_session_factory(url)
    try:
        await init_db(engine)
        async with session_factory() as db:
            result = await db.execute(
                select(BenchRun).order_by(BenchRun.created_at.desc(), BenchRun.id).limit(limit)
            )
            return [r.to_dict() for r in result.scalars().all()]
    finally:
        await engine.dispose()


def archive_rows(rows: Iterable[BenchRow], strategy: str = "optimal", url: Optional[str] = None) -> int:
    return asyncio.run(record_bench_rows(list(rows), strategy, url))


def fetch_runs(url: Optional[str] = None, limit: int = 50) -> List[dict]:
    return asyncio.run(list_bench_runs(url, limit))
