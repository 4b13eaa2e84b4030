"""Build stage: one biomarker per cohort from its time-ordered training split."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import pandas as pd

from core.output import save_cv_curve, save_split
from core.state import BiomarkerModel, CohortSplit, PipelineConfig
from evaluation.split import select_rows, split_by_time
from selection.biomarker import build_biomarker, save_model
from stages.base_stage import BaseStage

logger = logging.getLogger(__name__)


def model_path(out_dir: str | Path, name: str) -> Path:
    return Path(out_dir) / f"{name}_model.json"


def build_cohort(
    name: str,
    table: pd.DataFrame,
    config: PipelineConfig,
    seed: int,
    out_dir: str | Path,
) -> tuple[CohortSplit, BiomarkerModel]:
    """Split by visit time, build on the training part, write model, CV curve and split."""
    out_dir = Path(out_dir)
    split = split_by_time(table, config.evaluation.split_ratio)
    train = select_rows(table, split.train_ids)
    model, curve = build_biomarker(train, config.selection, seed, cohort_id=name, workers=config.workers)

    save_model(model, model_path(out_dir, name))
    save_cv_curve(curve, out_dir / f"{name}_cv_curve.csv")
    save_split(split, out_dir / f"{name}_split.json")
    if model.provenance.empty_selection:
        logger.warning("[%s] biomarker selected no features; it scores every patient alike", name)
    return split, model


class BuildStage(BaseStage):
    stage_name = "build"

    def run(self, state: dict[str, Any]) -> dict[str, Any]:
        config = self.config_of(state)
        seed = self.seed_of(state)
        out_dir = self.out_dir_of(state)

        splits: dict[str, CohortSplit] = {}
        models: dict[str, BiomarkerModel] = {}
        for name, table in state["cohorts"].items():
            splits[name], models[name] = build_cohort(name, table, config, seed, out_dir)
        return {"splits": splits, "models": models, "current_step": self.stage_name}
