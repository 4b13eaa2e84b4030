"""Result file writing for runs.

Every command writes into one output directory:
  effective_config.json    config echo (all commands)
  spec_echo.json           simulation spec echo (simulate)
  <cohort>.csv             feature tables
  <cohort>_model.json      biomarker + <cohort>_cv_curve.csv + <cohort>_split.json
  [<prefix>]transfer.json  transfer matrix, with auc_matrix.csv / delong.csv beside it
  report.txt               human-readable summary

Result files carry no timestamps so reruns are byte-identical.
"""

from __future__ import annotations

import logging
from pathlib import Path

import pandas as pd
from pydantic import BaseModel

from config.settings import (
    AUC_MATRIX_FILE,
    DELONG_FILE,
    EFFECTIVE_CONFIG_FILE,
    REPORT_FILE,
    ROC_POINTS_FILE,
    SPEC_ECHO_FILE,
)
from core.errors import DataIOError
from core.state import CohortSplit, CvCurve, ExperimentSpec, PipelineConfig, TransferMatrix
from core.table import FLOAT_FORMAT

logger = logging.getLogger(__name__)

TRANSFER_FILE = "transfer.json"
SIGNIFICANT_MARK = "**"


def _write_model(model: BaseModel, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def _write_csv(frame: pd.DataFrame, path: Path, index: bool = False) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def save_effective_config(config: PipelineConfig, out_dir: str | Path) -> Path:
    path = _write_model(config, Path(out_dir) / EFFECTIVE_CONFIG_FILE)
    logger.info("Saved effective config: %s", path)
    return path


def save_spec_echo(spec: ExperimentSpec, out_dir: str | Path) -> Path:
    return _write_model(spec, Path(out_dir) / SPEC_ECHO_FILE)


def save_split(split: CohortSplit, path: str | Path) -> Path:
    return _write_model(split, Path(path))


def save_cv_curve(curve: CvCurve, path: str | Path) -> Path:
    """One row per grid λ; `chosen` marks the λ the final fit used."""
    frame = pd.DataFrame({
        "lambda": curve.lambdas,
        "mean_loss": curve.mean_loss,
        "se_loss": curve.se_loss,
        "is_min": [lam == curve.lambda_min for lam in curve.lambdas],
        "is_1se": [lam == curve.lambda_1se for lam in curve.lambdas],
        "chosen": [lam == curve.chosen_lambda for lam in curve.lambdas],
    })
    return _write_csv(frame, Path(path))


def auc_frame(matrix: TransferMatrix) -> pd.DataFrame:
    frame = pd.DataFrame(matrix.aucs, index=matrix.row_names, columns=matrix.column_names)
    frame.index.name = "biomarker"
    return frame


def delong_frame(matrix: TransferMatrix) -> pd.DataFrame:
    rows = [
        {
            "column": c.column,
            "model_a": c.model_a,
            "model_b": c.model_b,
            "auc_a": c.result.auc_a,
            "auc_b": c.result.auc_b,
            "difference": c.result.difference,
            "z": c.result.z,
            "p": c.result.p,
            "significant": c.significant,
            "degenerate": c.result.degenerate,
        }
        for c in matrix.comparisons
    ]
    columns = ["column", "model_a", "model_b", "auc_a", "auc_b", "difference", "z", "p", "significant", "degenerate"]
    return pd.DataFrame(rows, columns=columns)


def save_transfer(matrix: TransferMatrix, out_dir: str | Path, prefix: str = "") -> list[Path]:
    """Write the transfer matrix as JSON plus the AUC and DeLong CSVs."""
    out_dir = Path(out_dir)
    saved = [
        _write_model(matrix, out_dir / f"{prefix}{TRANSFER_FILE}"),
        _write_csv(auc_frame(matrix), out_dir / f"{prefix}{AUC_MATRIX_FILE}", index=True),
        _write_csv(delong_frame(matrix), out_dir / f"{prefix}{DELONG_FILE}"),
    ]
    for path in saved:
        logger.info("Saved: %s", path)
    return saved


def save_roc_points(frame: pd.DataFrame, out_dir: str | Path, prefix: str = "") -> Path:
    return _write_csv(frame, Path(out_dir) / f"{prefix}{ROC_POINTS_FILE}")


def load_transfers(run_dir: str | Path) -> dict[str, TransferMatrix]:
    """All transfer matrices in a run directory, keyed by file name."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise DataIOError(f"run directory not found: {run_dir}")
    paths = sorted(run_dir.glob(f"*{TRANSFER_FILE}"))
    if not paths:
        raise DataIOError(f"no transfer results in {run_dir}; run `transfer` first")
    return {p.name: TransferMatrix.model_validate_json(p.read_text(encoding="utf-8")) for p in paths}


def _title(matrix: TransferMatrix) -> str:
    if matrix.trained_on:
        return f"Transfer matrix, biomarker feature sets refitted on {matrix.trained_on}"
    return "Transfer matrix"


def format_transfer(matrix: TransferMatrix) -> str:
    """Plain-text AUC grid with per-column pairwise DeLong results."""
    width = max(len(n) for n in [*matrix.row_names, *matrix.column_names, "mean_off_diag"]) + 2
    lines = [
        f"{_title(matrix)} (rows: biomarker source, columns: validation cohort, alpha = {matrix.alpha:g})",
        "",
        "biomarker".ljust(width) + "".join(c.rjust(width) for c in matrix.column_names) + "mean_off_diag".rjust(width),
    ]
    for i, name in enumerate(matrix.row_names):
        cells = "".join(f"{a:.4f}".rjust(width) for a in matrix.aucs[i])
        lines.append(name.ljust(width) + cells + f"{matrix.mean_off_diagonal(i):.4f}".rjust(width))

    lines += ["", f"Pairwise DeLong tests ({SIGNIFICANT_MARK} = p < {matrix.alpha:g})"]
    for c in matrix.comparisons:
        r = c.result
        if r.degenerate:
            verdict = "no detectable difference (degenerate)"
        else:
            verdict = f"z = {r.z:+.3f}  p = {r.p:.4g}" + (f"  {SIGNIFICANT_MARK}" if c.significant else "")
        lines.append(f"  [{c.column}] {c.model_a} vs {c.model_b}: dAUC = {r.difference:+.4f}  {verdict}")
    return "\n".join(lines)


def format_report(transfers: dict[str, TransferMatrix]) -> str:
    """Main matrix first, then the refit matrices by file name."""
    order = sorted(transfers, key=lambda name: (name != TRANSFER_FILE, name))
    sections = [format_transfer(transfers[name]) for name in order]
    return "\n\n".join(sections) + "\n"


def save_report(text: str, out_dir: str | Path) -> Path:
    path = Path(out_dir) / REPORT_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Saved report: %s", path)
    return path
