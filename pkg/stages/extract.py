"""Extraction stage: manifest of studies -> feature table CSV.

In the end-to-end experiment the manifest comes from the phantom emitter.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import pandas as pd

from config.settings import FEATURES_FILE
from core.state import PipelineConfig
from core.table import write_feature_table
from features.extractor import extract_cohort
from imaging.io import load_manifest
from stages.base_stage import BaseStage
from synth.phantom import emit_phantoms

logger = logging.getLogger(__name__)

PHANTOM_DIR = "phantoms"


def extract_manifest(manifest: str | Path, config: PipelineConfig, out_path: str | Path) -> pd.DataFrame:
    studies = load_manifest(manifest)
    table = extract_cohort(studies, config.catalog, workers=config.workers)
    write_feature_table(table, out_path)
    return table


class PhantomExtractStage(BaseStage):
    """Emit the configured phantom batch and run the imaging path over it."""

    stage_name = "extract_phantoms"

    def run(self, state: dict[str, Any]) -> dict[str, Any]:
        config = self.config_of(state)
        phantom_dir = self.out_dir_of(state) / PHANTOM_DIR
        manifest = emit_phantoms(config.phantoms, self.seed_of(state), phantom_dir)
        table = extract_manifest(manifest, config, phantom_dir / FEATURES_FILE)
        return {"phantom_features": table, "current_step": self.stage_name}
