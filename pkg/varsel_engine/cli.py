"""
Command-line interface: run, simulate, bench and report.
"""
import argparse
import logging
import os
import sys
from typing import Optional

from .bench import run_grid, write_bench_outputs
from .config import DEFAULT_OUT_DIR, THREADS_ENV_VAR, worker_limit
from .engine import run
from .experiment import ConfigError, ExperimentConfig, builtin_grid, load_experiment, load_grid, load_sim_spec
from .generator import GenerationError, generate, write_dataset, write_truth
from .ingest import DatasetError, load_delimited
from .predictor_space import PredictorSpace
from .report import (
    ReportError,
    fitness_curve_frame,
    load_report,
    render_bench_table,
    render_comparison,
    render_report,
    write_run_outputs,
)
from .plotting import plot_fitness_curve, save_fitness_curve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {self.prog}: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="varsel",
        description="Genetic-algorithm variable selection for logistic regression with interactions.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run_parser = verbs.add_parser("run", help="Run a GA experiment from a config file")
    run_parser.add_argument("config_path", nargs="?", metavar="CONFIG")
    run_parser.add_argument("--config", dest="config_flag", metavar="CONFIG")
    run_parser.add_argument("--seed", type=int, help="Override the GA seed")
    run_parser.add_argument("--jobs", type=int, help=f"Fitness worker threads (capped by {THREADS_ENV_VAR})")
    run_parser.add_argument("--out-dir", help="Output directory")
    run_parser.add_argument("--resume", metavar="CHECKPOINT", help="Continue from a checkpoint file")

    sim_parser = verbs.add_parser("simulate", help="Generate a simulated dataset and truth file")
    sim_parser.add_argument("config_path", nargs="?", metavar="SPEC")
    sim_parser.add_argument("--config", dest="config_flag", metavar="SPEC")
    sim_parser.add_argument("--seed", type=int, help="Override the simulation seed")
    sim_parser.add_argument("--out-dir", help="Output directory")

    bench_parser = verbs.add_parser("bench", help="Run the encoding comparison grid")
    bench_parser.add_argument("config_path", nargs="?", metavar="GRID",
                              help="Grid file (default: the built-in simulated grid)")
    bench_parser.add_argument("--config", dest="config_flag", metavar="GRID")
    bench_parser.add_argument("--seed", type=int, help="Override every cell's seed")
    bench_parser.add_argument("--jobs", type=int, default=1, help="Cells run concurrently")
    bench_parser.add_argument("--out-dir", help="Output directory")
    bench_parser.add_argument("--memory-budget", type=float, metavar="MB",
                              help="Report cells above this estimated memory as N.A.")

    report_parser = verbs.add_parser("report", help="Render one report or compare two")
    report_parser.add_argument("reports", nargs="+", metavar="REPORT")
    report_parser.add_argument("--out-dir", help="Where to write the fitness curve (default: next to the report)")
    return parser


def _config_path(args) -> Optional[str]:
    return args.config_flag or args.config_path


def _load_data(config: ExperimentConfig):
    """Dataset plus the true term names when the data is simulated."""
    if config.data is not None:
        return load_delimited(config.data), None
    simulated = generate(config.simulation)
    print(f"✓ Simulated {simulated.dataset.n_rows} rows, positive rate {simulated.positive_rate:.4f}")
    space = PredictorSpace(simulated.dataset.n_main)
    return simulated.dataset, [space.term_name(t) for t in simulated.true_terms]


def cmd_run(args) -> int:
    path = _config_path(args)
    if not path:
        print("❌ run needs a config file", file=sys.stderr)
        return EXIT_INPUT
    try:
        config = load_experiment(path).with_overrides(seed=args.seed, out_dir=args.out_dir)
        dataset, truth = _load_data(config)
    except (ConfigError, DatasetError, GenerationError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT

    workers = worker_limit(args.jobs or config.ga.workers)
    reports = []
    try:
        for repeat in range(config.repeat):
            ga = config.ga.model_copy(update={"rng_seed": config.ga.rng_seed + repeat, "workers": workers})
            print(f"Run {repeat + 1}/{config.repeat}: {ga.encoding} encoding, seed {ga.rng_seed}...")
            report = run(
                ga, dataset,
                cache_path=config.output.cache_path,
                checkpoint_path=config.output.checkpoint_path,
                resume_from=args.resume if repeat == 0 else None,
            )
            print(f"  ✓ {report.metric} {report.best_fitness:.4f}, {report.model_size} terms, "
                  f"{report.total_seconds:.2f}s")
            reports.append((report, ga))
    except ValueError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        logger.exception("Run failed")
        print(f"❌ Run failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    maximize = config.ga.maximize
    best, best_ga = reports[0]
    for report, ga in reports[1:]:
        if (report.best_fitness > best.best_fitness) if maximize else (report.best_fitness < best.best_fitness):
            best, best_ga = report, ga
    best.run_times = [r.total_seconds for r, _ in reports]
    best.truth = truth
    embedded = config.model_copy(update={"ga": best_ga.model_copy(update={"workers": config.ga.workers})})
    best.config = embedded.model_dump(mode="json")

    paths = write_run_outputs(best, config.output.dir)
    print(render_report(best))
    print(f"\n✓ Report written to {paths['json']}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    path = _config_path(args)
    if not path:
        print("❌ simulate needs a simulation spec file", file=sys.stderr)
        return EXIT_INPUT
    try:
        spec = load_sim_spec(path)
        if args.seed is not None:
            spec = spec.model_copy(update={"rng_seed": args.seed})
        simulated = generate(spec)
    except (ConfigError, GenerationError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT

    out_dir = args.out_dir or DEFAULT_OUT_DIR
    os.makedirs(out_dir, exist_ok=True)
    data_path = os.path.join(out_dir, "data.csv")
    truth_path = os.path.join(out_dir, "truth.txt")
    write_dataset(simulated.dataset, data_path)
    write_truth(truth_path, simulated.true_terms, PredictorSpace(spec.n_main))
    print(f"✓ {simulated.dataset.n_rows} rows x {spec.n_main} predictors -> {data_path}")
    print(f"✓ {len(simulated.true_terms)} true terms -> {truth_path}")
    print(f"Positive rate: {simulated.positive_rate:.4f}")
    if simulated.positive_rate in (0.0, 1.0):
        print("⚠ Response is constant; pick another seed before running the GA")
    return EXIT_OK


def cmd_bench(args) -> int:
    path = _config_path(args)
    try:
        grid = load_grid(path) if path else builtin_grid()
    except ConfigError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT

    print(f"Running {len(grid.cells)} grid cells with up to {worker_limit(args.jobs)} jobs...")
    rows = run_grid(grid, jobs=args.jobs, seed=args.seed, memory_budget_mb=args.memory_budget)
    paths = write_bench_outputs(rows, args.out_dir or DEFAULT_OUT_DIR)
    print(render_bench_table(rows))
    failed = [r for r in rows if r["status"].startswith("failed")]
    if failed:
        print(f"⚠ {len(failed)} cell(s) failed; see {paths['json']}")
    print(f"\n✓ Bench results written to {paths['csv']}")
    return EXIT_OK


def cmd_report(args) -> int:
    if len(args.reports) > 2:
        print("❌ report takes one report, or two to compare", file=sys.stderr)
        return EXIT_INPUT
    try:
        reports = [load_report(path) for path in args.reports]
    except ReportError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT

    if len(reports) == 2:
        labels = tuple(os.path.basename(os.path.dirname(os.path.abspath(p))) or p for p in args.reports)
        if labels[0] == labels[1]:
            labels = ("first", "second")
        print(render_comparison(reports[0], reports[1], labels))
        return EXIT_OK

    report = reports[0]
    out_dir = args.out_dir or os.path.dirname(os.path.abspath(args.reports[0]))
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "fitness_curve.csv")
    fitness_curve_frame(report).to_csv(csv_path, index=False)
    save_fitness_curve(plot_fitness_curve(report.history, report.metric),
                       os.path.join(out_dir, "fitness_curve.png"))
    print(render_report(report))
    print(f"\n✓ Fitness curve written to {csv_path}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "report": cmd_report,
}


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point for the CLI."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return COMMANDS[args.verb](args)


if __name__ == "__main__":
    sys.exit(main())
