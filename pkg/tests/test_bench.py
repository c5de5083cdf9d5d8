"""
Tests for benchmark grid execution.
"""
import json

import pandas as pd
import pytest

from varsel_engine.bench import (
    BENCH_COLUMNS,
    chromosome_length,
    estimate_memory_bytes,
    run_cell,
    run_grid,
    write_bench_outputs,
)
from varsel_engine.experiment import BenchCell, BenchGrid, builtin_grid

FAST_GA = {"population_size": 8, "generations": 3, "cv_folds": 5}
FAST_SIM = {"n_samples": 200}


def _grid(cells, **shared):
    return BenchGrid(ga=FAST_GA, simulation=FAST_SIM, cells=[BenchCell(**c) for c in cells], **shared)


def test_chromosome_length_by_encoding():
    assert chromosome_length(BenchCell(n_main=50, max_length=100, encoding="standard")) == 1275
    assert chromosome_length(BenchCell(n_main=50, max_length=100, encoding="indexed")) == 100


def test_memory_estimate_separates_the_largest_standard_cell():
    grid = builtin_grid()
    over = []
    for cell in grid.cells:
        config = grid.ga_config(cell)
        estimate = estimate_memory_bytes(config.population_size, 1000, chromosome_length(cell))
        if estimate > 256 * 2**20:
            over.append((cell.n_main, cell.encoding))
    assert over == [(50, "standard")]


def test_empty_grid_gives_empty_table(tmp_path):
    rows = run_grid(BenchGrid(), jobs=4)
    assert rows == []
    paths = write_bench_outputs(rows, str(tmp_path))
    assert json.load(open(paths["json"]))["cells"] == []


def test_run_cell_scores_recovery():
    grid = _grid([{"n_main": 4, "max_length": 8, "encoding": "indexed", "n_true": 3, "rng_seed": 1}])
    row = run_cell(grid, grid.cells[0])
    assert row["status"] == "ok"
    assert row["total_correct"] == 3
    assert 0 <= row["correct_terms"] <= 3
    assert row["correct_terms"] == len(set(row["selected_terms"]) & set(row["true_terms"]))
    assert row["model_size"] == len(row["selected_terms"])
    assert row["rng_seed"] == 1
    assert set(row) == set(BENCH_COLUMNS)


def test_memory_budget_marks_cell_not_applicable():
    grid = _grid([{"n_main": 20, "max_length": 50, "encoding": "standard", "n_true": 3}])
    row = run_cell(grid, grid.cells[0], memory_budget_mb=0.5)
    assert row["status"] == "memory budget exceeded"
    assert row["correct_terms"] is None
    assert row["estimated_mb"] > 0.5


def test_failing_cell_does_not_abort_grid():
    grid = _grid([
        {"n_main": 3, "max_length": 4, "encoding": "indexed", "true_terms": ["x1:x2"]},
        {"n_main": 3, "max_length": 4, "encoding": "indexed", "n_true": 2, "rng_seed": 5},
    ])
    rows = run_grid(grid, jobs=1)
    assert rows[0]["status"].startswith("failed:")
    assert "hierarchy" in rows[0]["status"]
    assert rows[1]["status"] == "ok"


def test_grid_budget_from_file_applies(tmp_path):
    grid = _grid(
        [{"n_main": 20, "max_length": 50, "encoding": "standard", "n_true": 3}],
        memory_budget_mb=0.1,
    )
    rows = run_grid(grid)
    assert rows[0]["status"] == "memory budget exceeded"
    paths = write_bench_outputs(rows, str(tmp_path))
    frame = pd.read_csv(paths["csv"])
    assert list(frame.columns) == BENCH_COLUMNS
    assert "N.A." in open(paths["text"]).read()


@pytest.mark.slow
def test_parallel_grid_matches_serial():
    grid = _grid([
        {"n_main": 4, "max_length": 8, "encoding": encoding, "n_true": 3, "rng_seed": 2}
        for encoding in ("standard", "indexed")
    ])
    strip = lambda rows: [{k: v for k, v in r.items() if k != "run_time"} for r in rows]
    assert strip(run_grid(grid, jobs=2)) == strip(run_grid(grid, jobs=1))


def _seeded_cells(n_main, max_length, n_true, seeds):
    return [
        {"n_main": n_main, "max_length": max_length, "encoding": encoding, "n_true": n_true, "rng_seed": seed}
        for encoding in ("standard", "indexed")
        for seed in seeds
    ]


@pytest.mark.slow
def test_medium_grid_recovers_true_sets_and_indexed_stays_sparser():
    grid = BenchGrid(cells=[BenchCell(**c) for c in _seeded_cells(20, 50, 19, range(5))])
    rows = run_grid(grid, jobs=2)
    assert all(r["status"] == "ok" for r in rows)
    frame = pd.DataFrame(rows)
    for encoding, group in frame.groupby("encoding"):
        full = (group["correct_terms"] == group["total_correct"]).sum()
        assert (group["total_correct"] == 19).all()
        assert full >= 3, encoding
    sizes = frame.groupby("encoding")["model_size"].median()
    assert sizes["indexed"] <= sizes["standard"]


@pytest.mark.slow
def test_indexed_run_time_grows_slower_with_predictor_count():
    cells = _seeded_cells(20, 50, 19, (0, 1)) + _seeded_cells(30, 100, 28, (0, 1))
    grid = BenchGrid(ga={"generations": 25}, cells=[BenchCell(**c) for c in cells])
    rows = run_grid(grid, jobs=1)
    assert all(r["status"] == "ok" for r in rows)
    times = pd.DataFrame(rows).groupby(["encoding", "n_main"])["run_time"].sum()
    ratio = {encoding: times[(encoding, 30)] / times[(encoding, 20)] for encoding in ("standard", "indexed")}
    assert ratio["indexed"] < ratio["standard"], ratio
