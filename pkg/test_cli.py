"""Command-line behaviour and exit codes."""

import csv
import json

import pytest

from app.main import main
from app.scenario import load_scenario, save_scenario
from app.trace import read_trace


@pytest.fixture
def scenario_file(tmp_path, corridor_scenario):
    return save_scenario(corridor_scenario, tmp_path / "corridor.json")


def test_gen_writes_a_loadable_scenario(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["gen", "--seed", "4", "--size", "12", "--actors", "2", "--agents", "3", "--length", "6", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["agents"] == 3 and summary["actors"] == 2
    cfg = load_scenario(out)
    assert cfg.seed == 4
    assert cfg.run_length == 6


def test_gen_is_deterministic(tmp_path):
    args = ["gen", "--seed", "11", "--size", "10", "--density", "0.1"]
    assert main(args + ["--out", str(tmp_path / "a.json")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_gen_rejects_an_impossible_density(tmp_path, capsys):
    assert main(["gen", "--size", "3", "--density", "0.9", "--out", str(tmp_path / "s.json")]) == 2
    assert "error:" in capsys.readouterr().err
    assert not (tmp_path / "s.json").exists()


def test_run_writes_trace_and_metrics(tmp_path, scenario_file, capsys):
    trace_out, metrics_out = tmp_path / "trace.jsonl", tmp_path / "metrics.json"
    code = main([
        "run", str(scenario_file), "--trace-out", str(trace_out), "--metrics-out", str(metrics_out), "--no-timing",
    ])
    assert code == 0
    metrics = json.loads(metrics_out.read_text())
    assert metrics["agents_total_cost"] == 8.0
    assert metrics["tracking_accuracy"] == 75.0
    assert metrics["completion_time_s"] == 0.0
    assert read_trace(trace_out)[-1].kind == "metric"
    assert "agents total cost" in capsys.readouterr().out


def test_run_missing_scenario(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 2
    assert "not found" in capsys.readouterr().err


def test_run_invalid_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"map": {"width": 0}}')
    assert main(["run", str(bad)]) == 2


def test_unknown_flag_is_a_usage_error(capsys):
    assert main(["run", "--frobnicate"]) == 1
    assert main([]) == 1
    assert main(["bench", "--agents", "2,x"]) == 1


def test_bench_needs_axes_or_a_preset(tmp_path):
    assert main(["bench", "--agents", "2", "--out", str(tmp_path / "b.csv")]) == 1
    assert main(["bench", "--preset", "reference", "--agents", "2", "--out", str(tmp_path / "b.csv")]) == 1


def test_bench_writes_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code = main([
        "bench", "--agents", "2", "--actors", "1", "--densities", "0", "--seeds", "2",
        "--size", "10", "--length", "4", "--out", str(out), "--markdown", "--no-timing",
    ])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["seed"] for r in rows] == ["0", "1", "mean"]
    assert "|" in capsys.readouterr().out


def test_render_frames(tmp_path, scenario_file, capsys):
    trace_out = tmp_path / "trace.jsonl"
    main(["run", str(scenario_file), "--trace-out", str(trace_out), "--metrics-out", str(tmp_path / "m.json")])
    frames = tmp_path / "frames"
    assert main(["render", str(trace_out), "--out-dir", str(frames), "--cell-px", "8"]) == 0
    assert len(list(frames.glob("frame_*.svg"))) == 8


def test_render_malformed_trace(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"t": 0}\n')
    assert main(["render", str(bad), "--out-dir", str(tmp_path / "frames")]) == 2
    assert "line 1" in capsys.readouterr().err


def test_render_binary_trace_exits_with_a_format_error(tmp_path, capsys):
    bad = tmp_path / "trace.jsonl"
    bad.write_bytes(b"\xff\xfe\x00\x01")
    assert main(["render", str(bad), "--out-dir", str(tmp_path / "frames")]) == 2
    assert "UTF-8" in capsys.readouterr().err


def test_bench_archive_and_runs_listing(tmp_path, capsys):
    url = f"sqlite+aiosqlite:///{tmp_path}/bench.db"
    code = main([
        "bench", "--agents", "2", "--actors", "1", "--densities", "0", "--seeds", "1",
        "--size", "10", "--length", "3", "--out", str(tmp_path / "b.csv"), "--db", url,
    ])
    assert code == 0
    capsys.readouterr()
    assert main(["runs", "--db", url]) == 0
    listing = capsys.readouterr().out
    assert "mean" in listing
