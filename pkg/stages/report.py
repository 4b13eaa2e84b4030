"""Report stage: human-readable summary rebuilt from a run directory's files."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from config.settings import FEATURES_FILE
from core.output import format_report, load_transfers, save_report
from core.table import feature_columns, read_feature_table
from stages.base_stage import BaseStage
from stages.extract import PHANTOM_DIR

logger = logging.getLogger(__name__)


def render_report(run_dir: str | Path) -> str:
    """Report text for a run directory; depends only on its result files."""
    run_dir = Path(run_dir)
    text = format_report(load_transfers(run_dir))
    phantom_table = run_dir / PHANTOM_DIR / FEATURES_FILE
    if phantom_table.exists():
        table = read_feature_table(phantom_table)
        text += f"\nPhantom cohort: {len(table)} studies x {len(feature_columns(table))} features extracted\n"
    return text


class ReportStage(BaseStage):
    stage_name = "report"

    def run(self, state: dict[str, Any]) -> dict[str, Any]:
        out_dir = self.out_dir_of(state)
        text = render_report(out_dir)
        save_report(text, out_dir)
        return {"report_text": text, "current_step": self.stage_name}
