# Multi-drone filming planner
