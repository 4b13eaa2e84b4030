"""Base class for experiment stages.

Every graph node wraps one stage. A stage reads what it needs from the
experiment state, writes its result files into the run's output directory
and returns only the state fields it owns.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from core.errors import ConfigError
from core.state import PipelineConfig

logger = logging.getLogger(__name__)


class BaseStage:
    """Subclasses must set `stage_name` and implement `run()`."""

    stage_name: str = "base"

    def run(self, state: dict[str, Any]) -> dict[str, Any]:
        """Execute the stage and return state updates."""
        raise NotImplementedError

    @staticmethod
    def config_of(state: dict[str, Any]) -> PipelineConfig:
        return state["config"]

    @staticmethod
    def out_dir_of(state: dict[str, Any]) -> Path:
        return Path(state["out_dir"])

    def seed_of(self, state: dict[str, Any]) -> int:
        seed = self.config_of(state).seed
        if seed is None:
            raise ConfigError(f"[{self.stage_name}] a seed is required")
        return seed
