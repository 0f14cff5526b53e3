from sqlalchemy.ext.asyncio import AsyncEngine, AsyncSession, create_async_engine, async_sessionmaker
from sqlalchemy.orm import DeclarativeBase
from typing import Optional, Tuple

from .config import DATABASE_URL


class Base(DeclarativeBase):
    pass


def make_session_factory(url: Optional[str] = None) -> Tuple[AsyncEngine, async_sessionmaker]:
    """Engine and session factory for the bench archive at `url` (DATABASE_URL by default)."""
    engine = create_async_engine(url or DATABASE_URL, echo=False)
    return engine, async_sessionmaker(engine, class_=AsyncSession, expire_on_commit=False)


async def init_db(engine: AsyncEngine):
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)
