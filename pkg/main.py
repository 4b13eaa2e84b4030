"""CLI entry point for the radiomic biomarker pipeline.

Usage:
    python main.py simulate --seed 7 --out runs/a                    # Three synthetic cohort CSVs
    python main.py phantoms --seed 7 --count 20 --out runs/ph        # Phantom volumes + manifest
    python main.py extract --manifest runs/ph/manifest.json --out runs/ph
    python main.py build runs/a/hard.csv runs/a/mixed_a.csv --seed 7 --out runs/a
    python main.py transfer --models runs/a/*_model.json --cohorts runs/a/{hard,mixed_a,mixed_b}.csv --out runs/a
    python main.py report runs/a
    python main.py run --seed 7 --out runs/full                      # Whole experiment in one go

Exit codes: 0 success, 2 configuration error, 3 data/I-O error,
4 numeric degeneracy, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from config.settings import DEFAULT_EXPERIMENT_PATH, DEFAULT_SEED, FEATURES_FILE, LOG_LEVEL, OUTPUT_DIR, WORKERS
from core.errors import ConfigError, DataIOError, RadiomicsError
from core.state import PipelineConfig

logger = logging.getLogger(__name__)


def _configure_logging() -> None:
    from rich.console import Console
    from rich.logging import RichHandler

    logging.basicConfig(
        level=LOG_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
    )


def _read_json(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def load_config(args: argparse.Namespace) -> PipelineConfig:
    """Model defaults ← environment ← --config file ← command-line flags."""
    data: dict = {"output_dir": str(OUTPUT_DIR), "workers": WORKERS, "seed": DEFAULT_SEED}
    if args.config:
        data.update(_read_json(args.config))
    if args.out:
        data["output_dir"] = args.out
    if args.seed is not None:
        data["seed"] = args.seed
    if args.workers is not None:
        data["workers"] = args.workers
    if getattr(args, "manifest", None):
        data["manifest"] = args.manifest
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def _require_seed(config: PipelineConfig, command: str) -> int:
    if config.seed is None:
        raise ConfigError(f"`{command}` requires --seed")
    return config.seed


def _with_default_simulation(config: PipelineConfig) -> PipelineConfig:
    if config.simulation is not None:
        return config
    defaults = PipelineConfig.model_validate(_read_json(DEFAULT_EXPERIMENT_PATH))
    return config.model_copy(update={"simulation": defaults.simulation})


def _prepare(config: PipelineConfig) -> Path:
    from core.output import save_effective_config

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_effective_config(config, out)
    return out


# --- Commands ---

def cmd_extract(args: argparse.Namespace, config: PipelineConfig) -> None:
    """Manifest of studies → one feature CSV row per study."""
    from stages.extract import extract_manifest

    if not config.manifest:
        raise ConfigError("`extract` needs --manifest or a `manifest` entry in the config")
    out = _prepare(config)
    table = extract_manifest(config.manifest, config, out / FEATURES_FILE)
    print(f"Extracted {len(table)} studies: {out / FEATURES_FILE}")


def cmd_build(args: argparse.Namespace, config: PipelineConfig) -> None:
    """Feature CSV(s) → biomarker model JSON, CV curve CSV and split per cohort."""
    from core.table import read_feature_table
    from stages.build import build_cohort, model_path

    seed = _require_seed(config, "build")
    out = _prepare(config)
    for csv in args.features:
        name = Path(csv).stem
        _, model = build_cohort(name, read_feature_table(csv), config, seed, out)
        flag = " (empty selection)" if model.provenance.empty_selection else ""
        print(f"[{name}] {len(model.feature_names)} features selected{flag}: {model_path(out, name)}")


def cmd_transfer(args: argparse.Namespace, config: PipelineConfig) -> None:
    """Model JSONs × cohort CSVs → AUC matrix and DeLong CSVs on the validation splits."""
    from core.table import read_feature_table
    from evaluation.split import select_rows, split_by_time
    from selection.biomarker import load_model
    from stages.transfer import evaluate_refit_transfer, evaluate_transfer

    out = _prepare(config)
    models = {}
    for path in args.models:
        model = load_model(path)
        models[model.provenance.cohort_id] = model

    validation = {}
    for csv in args.cohorts:
        table = read_feature_table(csv)
        split = split_by_time(table, config.evaluation.split_ratio)
        validation[Path(csv).stem] = select_rows(table, split.val_ids)

    matrix = evaluate_transfer(models, validation, config, out, write_roc=args.roc)
    print(f"Transfer matrix {len(matrix.row_names)}x{len(matrix.column_names)} written to {out}")

    if args.refit_on:
        table = read_feature_table(args.refit_on)
        split = split_by_time(table, config.evaluation.split_ratio)
        train_name = Path(args.refit_on).stem
        evaluate_refit_transfer(models, train_name, select_rows(table, split.train_ids), validation, config, out)
        print(f"Refit transfer matrix on {train_name} written to {out}")


def cmd_simulate(args: argparse.Namespace, config: PipelineConfig) -> None:
    """Simulation spec → three cohort feature CSVs plus a spec echo."""
    from stages.simulate import simulate_cohorts

    config = _with_default_simulation(config)
    seed = _require_seed(config, "simulate")
    out = _prepare(config)
    cohorts = simulate_cohorts(config.simulation, seed, out)
    for name, table in cohorts.items():
        print(f"{name}: {len(table)} patients -> {out / f'{name}.csv'}")


def cmd_phantoms(args: argparse.Namespace, config: PipelineConfig) -> None:
    """Phantom batch → raw volumes, masks and a manifest usable by `extract`."""
    from synth.phantom import emit_phantoms

    if args.count is not None:
        config = config.model_copy(update={"phantoms": config.phantoms.model_copy(update={"count": args.count})})
    if config.phantoms.count < 1:
        raise ConfigError("`phantoms` needs --count >= 1 or phantoms.count in the config")
    seed = _require_seed(config, "phantoms")
    out = _prepare(config)
    manifest = emit_phantoms(config.phantoms, seed, out)
    print(f"Wrote {config.phantoms.count} phantoms: {manifest}")


def cmd_report(args: argparse.Namespace, config: PipelineConfig) -> None:
    """Run directory → report text (saved and printed) plus an AUC table on the console."""
    from core.output import load_transfers, save_report
    from stages.report import render_report

    run_dir = Path(args.run_dir or config.output_dir)
    if not run_dir.is_dir() or not any(run_dir.iterdir()):
        raise DataIOError(f"run directory {run_dir} is missing or empty")
    text = render_report(run_dir)
    save_report(text, run_dir)
    _print_tables(load_transfers(run_dir))
    print(text, end="")


def cmd_run(args: argparse.Namespace, config: PipelineConfig) -> None:
    """Whole experiment: simulate → (phantoms) → build → transfer → report."""
    from core.runner import ExperimentRunner

    config = _with_default_simulation(config)
    _require_seed(config, "run")
    state = ExperimentRunner().run(config)
    print(state.get("report_text", ""), end="")


def _print_tables(transfers: dict) -> None:
    from rich.console import Console
    from rich.table import Table

    console = Console()
    for name in sorted(transfers):
        matrix = transfers[name]
        # starred: the higher-AUC side of a significant pair
        significant = {
            (c.column, c.model_a if c.result.difference > 0 else c.model_b)
            for c in matrix.comparisons
            if c.significant
        }
        table = Table(title=f"{name} (alpha = {matrix.alpha:g})")
        table.add_column("biomarker")
        for col in matrix.column_names:
            table.add_column(col, justify="right")
        for i, row in enumerate(matrix.row_names):
            cells = [
                f"{auc:.4f}" + (" *" if (col, row) in significant else "")
                for col, auc in zip(matrix.column_names, matrix.aucs[i])
            ]
            table.add_row(row, *cells)
        console.print(table)


COMMANDS = {
    "extract": cmd_extract,
    "build": cmd_build,
    "transfer": cmd_transfer,
    "simulate": cmd_simulate,
    "phantoms": cmd_phantoms,
    "report": cmd_report,
    "run": cmd_run,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (PipelineConfig schema)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="experiment seed (required by build/simulate/phantoms/run)")
    common.add_argument("--workers", type=int, help="worker threads for extraction and CV")

    parser = argparse.ArgumentParser(prog="radiomics", description="Radiomic biomarker pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    extract = sub.add_parser("extract", parents=[common], help="extract features from a study manifest")
    extract.add_argument("--manifest", help="cohort manifest JSON")

    build = sub.add_parser("build", parents=[common], help="build one biomarker per feature CSV")
    build.add_argument("features", nargs="+", help="feature CSV(s); the file stem names the cohort")

    transfer = sub.add_parser("transfer", parents=[common], help="cross-cohort transfer matrix")
    transfer.add_argument("--models", nargs="+", required=True, help="biomarker model JSONs")
    transfer.add_argument("--cohorts", nargs="+", required=True, help="cohort feature CSVs")
    transfer.add_argument("--refit-on", help="also refit every biomarker feature set on this cohort's training split")
    transfer.add_argument("--roc", action="store_true", help="write ROC points for external plotting")

    sub.add_parser("simulate", parents=[common], help="simulate the three experiment cohorts")

    phantoms = sub.add_parser("phantoms", parents=[common], help="write a phantom cohort with manifest")
    phantoms.add_argument("--count", type=int, help="number of phantoms")

    report = sub.add_parser("report", parents=[common], help="summarize a run directory")
    report.add_argument("run_dir", nargs="?", help="run directory (defaults to --out)")

    sub.add_parser("run", parents=[common], help="run the whole experiment")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging()
    try:
        config = load_config(args)
        COMMANDS[args.command](args, config)
    except RadiomicsError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure in `%s`", args.command)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
