"""Transfer stage: every biomarker on every cohort's validation split."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import pandas as pd

from core.output import save_roc_points, save_transfer
from core.state import BiomarkerModel, CohortSplit, PipelineConfig, TransferMatrix
from evaluation.split import select_rows
from evaluation.transfer import refit_transfer_matrix, roc_table, transfer_matrix
from stages.base_stage import BaseStage

logger = logging.getLogger(__name__)


def validation_tables(cohorts: dict[str, pd.DataFrame], splits: dict[str, CohortSplit]) -> dict[str, pd.DataFrame]:
    return {name: select_rows(table, splits[name].val_ids) for name, table in cohorts.items()}


def evaluate_transfer(
    models: dict[str, BiomarkerModel],
    validation: dict[str, pd.DataFrame],
    config: PipelineConfig,
    out_dir: str | Path,
    write_roc: bool = False,
) -> TransferMatrix:
    matrix = transfer_matrix(models, validation, alpha=config.evaluation.alpha)
    save_transfer(matrix, out_dir)
    if write_roc or config.evaluation.write_roc_points:
        save_roc_points(roc_table(models, validation), out_dir)
    return matrix


def evaluate_refit_transfer(
    models: dict[str, BiomarkerModel],
    train_name: str,
    train_table: pd.DataFrame,
    validation: dict[str, pd.DataFrame],
    config: PipelineConfig,
    out_dir: str | Path,
) -> TransferMatrix:
    """Refit every biomarker's feature set on one training table, then evaluate like `evaluate_transfer`."""
    matrix = refit_transfer_matrix(
        models, train_table, train_name, validation, config.selection, alpha=config.evaluation.alpha,
    )
    save_transfer(matrix, out_dir, prefix=f"refit_{train_name}_")
    return matrix


class TransferStage(BaseStage):
    stage_name = "transfer"

    def run(self, state: dict[str, Any]) -> dict[str, Any]:
        config, out_dir = self.config_of(state), self.out_dir_of(state)
        validation = validation_tables(state["cohorts"], state["splits"])
        matrix = evaluate_transfer(state["models"], validation, config, out_dir)

        # every feature set refitted on each cohort's training split
        for name, table in state["cohorts"].items():
            train = select_rows(table, state["splits"][name].train_ids)
            evaluate_refit_transfer(state["models"], name, train, validation, config, out_dir)
        logger.info("Wrote %d refit transfer matrices", len(state["cohorts"]))
        return {"transfer": matrix, "current_step": self.stage_name}
