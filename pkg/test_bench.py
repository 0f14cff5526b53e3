"""Benchmark sweeps and their CSV / markdown output."""

import csv
import io

import pytest

from app.bench import (
    BENCH_HEADER,
    PRESETS,
    BenchConfig,
    BenchSettings,
    dumps_csv,
    grid_configs,
    markdown_table,
    mean_row,
    run_bench,
)

SMALL = BenchSettings(size=12, length=6, seeds=3, record_timing=False)


@pytest.fixture(scope="module")
def small_rows():
    return run_bench([BenchConfig(2, 2, 5)], SMALL)


def test_header_columns():
    assert BENCH_HEADER == (
        "agents",
        "actors",
        "initial_viewpoints",
        "obstacle_density_pct",
        "actors_total_cost",
        "agents_total_cost",
        "nodes_expanded",
        "tracking_accuracy_pct",
        "completion_time_s",
        "seed",
    )


def test_one_row_per_seed_plus_mean(small_rows):
    assert [r.seed for r in small_rows] == ["0", "1", "2", "mean"]
    assert all((r.agents, r.actors, r.obstacle_density_pct) == (2, 2, 5) for r in small_rows)
    assert all(r.completion_time_s == 0.0 for r in small_rows)
    for r in small_rows:
        assert 0.0 <= r.tracking_accuracy_pct <= 100.0


def test_mean_row_averages_the_seed_rows(small_rows):
    seeds, mean = small_rows[:-1], small_rows[-1]
    expected = sum(r.agents_total_cost for r in seeds) / len(seeds)
    assert mean.agents_total_cost == pytest.approx(expected, abs=1e-4)
    assert mean == mean_row(seeds)


def test_bench_is_reproducible(small_rows):
    assert run_bench([BenchConfig(2, 2, 5)], SMALL) == small_rows


def test_csv_layout(small_rows):
    parsed = list(csv.reader(io.StringIO(dumps_csv(small_rows))))
    assert tuple(parsed[0]) == BENCH_HEADER
    assert len(parsed) == 1 + len(small_rows)
    assert parsed[-1][-1] == "mean"


def test_markdown_table(small_rows):
    table = markdown_table(small_rows)
    lines = table.splitlines()
    assert lines[0].startswith("|")
    assert "tracking accuracy pct" in lines[0]
    assert len(lines) == 2 + len(small_rows)


def test_grid_configs_are_the_sorted_product():
    configs = grid_configs([3, 2], [2], [10, 5])
    assert configs == [
        BenchConfig(2, 2, 5),
        BenchConfig(2, 2, 10),
        BenchConfig(3, 2, 5),
        BenchConfig(3, 2, 10),
    ]


def test_reference_preset():
    preset = PRESETS["reference"]
    assert [(c.agents, c.actors, c.density_pct) for c in preset] == [
        (3, 2, 7), (2, 2, 5), (3, 3, 5), (5, 5, 10), (10, 10, 15),
    ]


@pytest.mark.slow
def test_process_pool_matches_inline_run(small_rows):
    assert run_bench([BenchConfig(2, 2, 5)], SMALL, workers=2) == small_rows
