"""Simulate stage: seeded feature-space cohorts written as feature CSVs."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import pandas as pd

from core.errors import ConfigError
from core.output import save_spec_echo
from core.state import ExperimentSpec
from core.table import write_feature_table
from stages.base_stage import BaseStage
from synth.cohorts import make_cohorts

logger = logging.getLogger(__name__)


def simulate_cohorts(spec: ExperimentSpec, seed: int, out_dir: str | Path) -> dict[str, pd.DataFrame]:
    """Generate the three cohorts and write `<name>.csv` plus the spec echo."""
    out_dir = Path(out_dir)
    cohorts = make_cohorts(spec, seed)
    for name, table in cohorts.items():
        write_feature_table(table, out_dir / f"{name}.csv")
    save_spec_echo(spec, out_dir)
    return cohorts


class SimulateStage(BaseStage):
    stage_name = "simulate"

    def run(self, state: dict[str, Any]) -> dict[str, Any]:
        config = self.config_of(state)
        if config.simulation is None:
            raise ConfigError("the experiment needs a `simulation` section")
        cohorts = simulate_cohorts(config.simulation, self.seed_of(state), self.out_dir_of(state))
        return {"cohorts": cohorts, "current_step": self.stage_name}
