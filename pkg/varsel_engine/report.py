"""
Run and benchmark reports: JSON documents for machines, text tables for people.
"""
import json
import logging
import math
import os
from typing import Optional, Sequence

import pandas as pd

from .models import RunReport
from .plotting import plot_fitness_curve, save_fitness_curve

logger = logging.getLogger(__name__)

RULE = "=" * 70
P_VALUE_FLOOR = 2e-16


class ReportError(ValueError):
    """Raised when a report file cannot be read back."""
    pass


def save_report(report: RunReport, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, indent=2)


def load_report(path: str) -> RunReport:
    """
    Raises:
        ReportError: Missing file, invalid JSON or missing fields
    """
    if not os.path.isfile(path):
        raise ReportError(f"Report not found: {path}")
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        return RunReport.from_dict(data)
    except json.JSONDecodeError as e:
        raise ReportError(f"{path} is not valid JSON: {e}")
    except (KeyError, TypeError, ValueError) as e:
        raise ReportError(f"{path} is not a run report: {e!r}")


def format_p_value(p: float) -> str:
    if not math.isfinite(p):
        return "NA"
    if p < P_VALUE_FLOOR:
        return "< 2e-16"
    return f"{p:.3g}" if p >= 1e-4 else f"{p:.2e}"


def _format_number(value: float, spec: str) -> str:
    return format(value, spec) if math.isfinite(value) else "NA"


def format_coefficient_table(rows: Sequence[dict]) -> str:
    """
    Coefficients with standard errors, z-values and p-values, the intercept
    first, then main effects, then interactions.
    """
    if not rows:
        return "(no coefficients)"
    width = max(len(r["term"]) for r in rows) + 2
    header = f"{'':<{width}}{'Estimate':>12}{'Std. Error':>12}{'z value':>10}{'Pr(>|z|)':>11}"
    lines = [header]

    def line(row: dict) -> str:
        return (
            f"{row['term']:<{width}}"
            f"{_format_number(row['estimate'], '12.5f')}"
            f"{_format_number(row['std_error'], '12.5f')}"
            f"{_format_number(row['z_value'], '10.3f')}"
            f"{format_p_value(row['p_value']):>11} {row['signif']}"
        ).rstrip()

    intercept, terms = rows[0], rows[1:]
    lines.append(line(intercept))
    mains = [r for r in terms if ":" not in r["term"]]
    pairs = [r for r in terms if ":" in r["term"]]
    if mains:
        lines.append("Main Effects")
        lines.extend(line(r) for r in mains)
    if pairs:
        lines.append("Interaction Effects")
        lines.extend(line(r) for r in pairs)
    lines.append("---")
    lines.append("Signif. codes: 0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1")
    return "\n".join(lines)


def fitness_curve_frame(report: RunReport) -> pd.DataFrame:
    """Plot-ready per-generation series."""
    return pd.DataFrame(
        [
            {
                "generation": s.generation,
                "best_fitness": s.best_fitness,
                "mean_fitness": s.mean_fitness,
                "best_model_size": s.best_model_size,
                "repair_overflows": s.repair_overflows,
                "evaluation_failures": s.evaluation_failures,
                "separated_fits": s.separated_fits,
            }
            for s in report.history
        ],
        columns=[
            "generation", "best_fitness", "mean_fitness", "best_model_size",
            "repair_overflows", "evaluation_failures", "separated_fits",
        ],
    )


def correct_terms(report: RunReport, truth: Optional[Sequence[str]] = None) -> Optional[int]:
    truth = truth if truth is not None else report.truth
    if truth is None:
        return None
    return len(set(report.term_names) & set(truth))


def render_report(report: RunReport) -> str:
    """Human-readable summary of a run."""
    config = report.config.get("ga", report.config)
    lines = [
        RULE,
        "VARIABLE SELECTION REPORT".center(70),
        RULE,
        f"Encoding:        {report.encoding}"
        + (f" (max length {config.get('max_length')})" if report.encoding == "indexed" else ""),
        f"Fitness:         {report.metric} = {report.best_fitness:.4f}",
        f"Generations:     {len(report.history)}",
        f"Model size:      {report.model_size} terms "
        f"({sum(':' not in n for n in report.term_names)} main effects, "
        f"{sum(':' in n for n in report.term_names)} interactions)",
        f"Full-data AIC:   {report.final_fit.get('aic', float('nan')):.2f}",
    ]
    if "null_deviance" in report.final_fit:
        lines.append(
            f"Deviance:        null {report.final_fit['null_deviance']:.2f}, "
            f"residual {report.final_fit['residual_deviance']:.2f}"
        )
    if report.truth is not None:
        lines.append(f"Correct terms:   {correct_terms(report)} of {len(report.truth)}")
    if report.repair_overflows:
        lines.append(f"Repair overflows: {report.repair_overflows}")
    if report.evaluation_failures:
        lines.append(f"Failed fitness evaluations: {report.evaluation_failures}")
    if report.separated_fits:
        lines.append(f"Fits scored under separation: {report.separated_fits}")
    if report.final_fit.get("separation_flag"):
        lines.append("⚠ Possible separation: some coefficients are very large")
    if not report.final_fit.get("converged", True):
        lines.append("⚠ Final fit did not converge")

    times = report.run_times or [report.total_seconds]
    if len(times) > 1:
        lines.append(
            "Run times (s):   " + "  ".join(f"{t:.2f}" for t in times)
            + f"   mean {report.mean_run_time:.2f}"
        )
    else:
        lines.append(f"Run time (s):    {times[0]:.2f}")

    lines += ["", "Selected terms:", "  " + ", ".join(report.term_names), "", "Coefficients:"]
    lines.append(format_coefficient_table(report.coefficient_table))
    return "\n".join(lines)


def write_run_outputs(report: RunReport, out_dir: str) -> dict[str, str]:
    """Write report.json, report.txt, fitness_curve.csv and fitness_curve.png."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "json": os.path.join(out_dir, "report.json"),
        "text": os.path.join(out_dir, "report.txt"),
        "curve_csv": os.path.join(out_dir, "fitness_curve.csv"),
        "curve_png": os.path.join(out_dir, "fitness_curve.png"),
    }
    save_report(report, paths["json"])
    with open(paths["text"], "w", encoding="utf-8") as handle:
        handle.write(render_report(report) + "\n")
    fitness_curve_frame(report).to_csv(paths["curve_csv"], index=False)
    save_fitness_curve(plot_fitness_curve(report.history, report.metric), paths["curve_png"])
    logger.info("Report written to %s", out_dir)
    return paths


def compare_reports(a: RunReport, b: RunReport) -> dict:
    """Selected-term overlap between two runs."""
    first, second = set(a.term_names), set(b.term_names)
    return {
        "shared": sorted(first & second, key=a.term_names.index),
        "only_first": [t for t in a.term_names if t not in second],
        "only_second": [t for t in b.term_names if t not in first],
        "overlap": len(first & second),
        "shared_interactions": sum(":" in t for t in first & second),
    }


def render_comparison(a: RunReport, b: RunReport, labels: tuple[str, str] = ("first", "second")) -> str:
    comparison = compare_reports(a, b)
    rows = []
    for term in a.term_names + comparison["only_second"]:
        rows.append((term, "x" if term in a.term_names else "", "x" if term in b.term_names else ""))
    width = max([len(t) for t, _, _ in rows] + [10]) + 2
    lines = [
        RULE,
        f"{'term':<{width}}{labels[0]:>12}{labels[1]:>12}",
    ]
    lines.extend(f"{t:<{width}}{x:>12}{y:>12}" for t, x, y in rows)
    lines += [
        RULE,
        f"Selected by both: {comparison['overlap']} terms "
        f"({comparison['shared_interactions']} interactions)",
        f"Only {labels[0]}: {len(comparison['only_first'])}   Only {labels[1]}: {len(comparison['only_second'])}",
        f"{labels[0]}: {a.metric} {a.best_fitness:.4f}, mean run time {a.mean_run_time:.2f}s",
        f"{labels[1]}: {b.metric} {b.best_fitness:.4f}, mean run time {b.mean_run_time:.2f}s",
    ]
    return "\n".join(lines)


def _cell_text(value, spec: str) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return "N.A."
    return format(value, spec)


def render_bench_table(rows: Sequence[dict]) -> str:
    """
    Grid results grouped by predictor count, one line per encoding.

    Rows marked not-applicable (memory budget) or failed show N.A.
    """
    header = f"{'':<12}{'Correct terms':>15}{'Total correct':>15}{'Model size':>12}{'AIC':>10}{'Run time (s)':>14}"
    lines = [header]
    current = None
    for row in rows:
        group = (row["n_main"], row["total_terms"])
        if group != current:
            current = group
            lines.append(f"{row['n_main']} main effects - {row['total_terms']} total predictors")
        ok = row["status"] == "ok"
        lines.append(
            f"{row['encoding'].capitalize():<12}"
            f"{_cell_text(row['correct_terms'] if ok else None, 'd'):>15}"
            f"{_cell_text(row['total_correct'] if ok else None, 'd'):>15}"
            f"{_cell_text(row['model_size'] if ok else None, 'd'):>12}"
            f"{_cell_text(row['aic'] if ok else None, '.1f'):>10}"
            f"{_cell_text(row['run_time'] if ok else None, '.2f'):>14}"
            + ("" if ok else f"   ({row['status']})")
        )
    return "\n".join(lines)
