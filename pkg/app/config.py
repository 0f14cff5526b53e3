"""Runtime configuration for the drone filming planner."""

import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# High-level constraint-tree expansions allowed per CBS solve
CBS_NODE_BUDGET = int(os.getenv("CBS_NODE_BUDGET", "100000"))

# Process pool size for bench sweeps (1 = run inline)
BENCH_WORKERS = int(os.getenv("BENCH_WORKERS", "1"))

# Pixel size of one grid cell in rendered frames
SVG_CELL_PX = int(os.getenv("SVG_CELL_PX", "24"))

# Bench archive (async SQLAlchemy URL)
DATABASE_URL = os.getenv("DATABASE_URL", "sqlite+aiosqlite:///./bench.db")
