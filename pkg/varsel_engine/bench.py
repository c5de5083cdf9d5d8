"""
Benchmark grid execution: each cell simulates a dataset with a known true
set, runs the GA with one encoding and scores recovery.
"""
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import pandas as pd

from .config import worker_limit
from .engine import run
from .experiment import BenchCell, BenchGrid
from .generator import generate
from .predictor_space import PredictorSpace, term_count
from .report import render_bench_table

logger = logging.getLogger(__name__)

BYTES_PER_VALUE = 8
BENCH_COLUMNS = [
    "n_main", "total_terms", "encoding", "max_length", "status", "correct_terms",
    "total_correct", "model_size", "aic", "best_fitness", "run_time", "estimated_mb",
    "rng_seed", "selected_terms", "true_terms",
]


def chromosome_length(cell: BenchCell) -> int:
    if cell.encoding == "standard":
        return term_count(cell.n_main)
    return cell.max_length


def estimate_memory_bytes(population_size: int, n_rows: int, length: int) -> int:
    """Bytes to hold every member's full addressable design matrix at once."""
    return population_size * n_rows * length * BYTES_PER_VALUE


def run_cell(
    grid: BenchGrid,
    cell: BenchCell,
    seed: Optional[int] = None,
    memory_budget_mb: Optional[float] = None
) -> dict:
    """Run one grid cell; failures are recorded in the returned row, never raised."""
    row = {column: None for column in BENCH_COLUMNS}
    row.update(
        n_main=cell.n_main,
        total_terms=term_count(cell.n_main),
        encoding=cell.encoding,
        max_length=cell.max_length,
    )
    try:
        config = grid.ga_config(cell, seed)
        spec = grid.sim_spec(cell)
        estimate = estimate_memory_bytes(config.population_size, spec.n_samples, chromosome_length(cell))
        row["estimated_mb"] = estimate / 2**20
        row["rng_seed"] = config.rng_seed
        if memory_budget_mb is not None and estimate > memory_budget_mb * 2**20:
            row["status"] = "memory budget exceeded"
            logger.warning(
                "%s: estimated %.0f MB exceeds the %.0f MB budget; reported as N.A.",
                cell.label, row["estimated_mb"], memory_budget_mb
            )
            return row

        simulated = generate(spec)
        space = PredictorSpace(cell.n_main)
        truth = [space.term_name(t) for t in simulated.true_terms]
        report = run(config, simulated.dataset)
        row.update(
            status="ok",
            correct_terms=len(set(report.term_names) & set(truth)),
            total_correct=len(truth),
            model_size=report.model_size,
            aic=float(report.final_fit["aic"]),
            best_fitness=float(report.best_fitness),
            run_time=report.total_seconds,
            selected_terms=report.term_names,
            true_terms=truth,
        )
        logger.info(
            "%s: %d/%d correct, size %d, %.1fs",
            cell.label, row["correct_terms"], row["total_correct"], row["model_size"], row["run_time"]
        )
    except Exception as e:
        logger.error("%s failed: %s", cell.label, e)
        row["status"] = f"failed: {e}"
    return row


def run_grid(
    grid: BenchGrid,
    jobs: int = 1,
    seed: Optional[int] = None,
    memory_budget_mb: Optional[float] = None
) -> list[dict]:
    """
    Run every cell, up to `jobs` at a time in worker processes.

    Rows come back in grid order whatever the schedule, since each cell owns
    its seeded streams.
    """
    budget = memory_budget_mb if memory_budget_mb is not None else grid.memory_budget_mb
    if not grid.cells:
        return []
    jobs = min(worker_limit(jobs), len(grid.cells))
    if jobs <= 1:
        return [run_cell(grid, cell, seed, budget) for cell in grid.cells]

    rows = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_cell, grid, cell, seed, budget) for cell in grid.cells]
        for cell, future in zip(grid.cells, futures):
            try:
                rows.append(future.result())
            except Exception as e:
                logger.error("%s: worker process failed: %s", cell.label, e)
                rows.append({
                    **{column: None for column in BENCH_COLUMNS},
                    "n_main": cell.n_main,
                    "total_terms": term_count(cell.n_main),
                    "encoding": cell.encoding,
                    "max_length": cell.max_length,
                    "status": f"failed: {e}",
                })
    return rows


def bench_frame(rows: list[dict]) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=BENCH_COLUMNS)
    for column in ("selected_terms", "true_terms"):
        frame[column] = frame[column].map(lambda terms: ";".join(terms) if terms else "")
    return frame


def write_bench_outputs(rows: list[dict], out_dir: str) -> dict[str, str]:
    """Write bench.json, bench.csv and the text table."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "json": os.path.join(out_dir, "bench.json"),
        "csv": os.path.join(out_dir, "bench.csv"),
        "text": os.path.join(out_dir, "bench.txt"),
    }
    with open(paths["json"], "w", encoding="utf-8") as handle:
        json.dump({"cells": rows}, handle, indent=2)
    bench_frame(rows).to_csv(paths["csv"], index=False)
    with open(paths["text"], "w", encoding="utf-8") as handle:
        handle.write(render_bench_table(rows) + "\n")
    return paths
