from sqlalchemy import Column, Integer, String, Float, DateTime, Index
from datetime import datetime
import uuid

from .database import Base


def generate_uuid():
    return str(uuid.uuid4())


class BenchRun(Base):
    """One archived bench row (a single seed, or a per-config mean)."""
    __tablename__ = "bench_runs"

    id = Column(String, primary_key=True, default=generate_uuid)
    created_at = Column(DateTime, default=datetime.utcnow)
    strategy = Column(String, default="optimal")  # "optimal" or "greedy"
    seed = Column(String, nullable=False)  # seed number, or "mean"

    agents = Column(Integer, nullable=False)
    actors = Column(Integer, nullable=False)
    initial_viewpoints = Column(Float, default=0.0)
    obstacle_density_pct = Column(Float, default=0.0)
    actors_total_cost = Column(Float, default=0.0)
    agents_total_cost = Column(Float, default=0.0)
    nodes_expanded = Column(Float, default=0.0)
    tracking_accuracy_pct = Column(Float, default=0.0)
    completion_time_s = Column(Float, default=0.0)

    __table_args__ = (
        Index("ix_bench_runs_config", "agents", "actors", "obstacle_density_pct"),
    )

    def to_dict(self):
        return {
            "id": self.id,
            "created_at": self.created_at.isoformat() if self.created_at else None,
            "strategy": self.strategy,
            "seed": self.seed,
            "agents": self.agents,
            "actors": self.actors,
            "initial_viewpoints": self.initial_viewpoints,
            "obstacle_density_pct": self.obstacle_density_pct,
            "actors_total_cost": self.actors_total_cost,
            "agents_total_cost": self.agents_total_cost,
            "nodes_expanded": self.nodes_expanded,
            "tracking_accuracy_pct": self.tracking_accuracy_pct,
            "completion_time_s": self.completion_time_s,
        }
