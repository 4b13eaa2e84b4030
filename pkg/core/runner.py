"""Experiment execution manager.

Runs the compiled experiment graph once over a fresh output directory and
returns the final state.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from core.errors import ConfigError
from core.graph import build_graph
from core.output import save_effective_config
from core.state import ExperimentState, PipelineConfig

logger = logging.getLogger(__name__)


class ExperimentRunner:
    """Drives the experiment graph and logs node completion."""

    def __init__(self) -> None:
        self.graph = build_graph()

    def run(self, config: PipelineConfig, out_dir: str | Path | None = None) -> ExperimentState:
        """Run simulate → (phantoms) → build → transfer → report.

        Args:
            config: Effective configuration; must carry a seed and a simulation spec.
            out_dir: Output directory. Defaults to config.output_dir.

        Returns:
            The final experiment state.
        """
        if config.seed is None:
            raise ConfigError("`run` requires a seed")
        if config.simulation is None:
            raise ConfigError("`run` requires a `simulation` section in the config")

        out = Path(out_dir or config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_effective_config(config, out)

        initial_state: dict[str, Any] = {
            "config": config,
            "out_dir": str(out),
            "current_step": "started",
        }
        logger.info("Starting experiment (seed=%d) in %s", config.seed, out)

        final: dict[str, Any] = dict(initial_state)
        for event in self.graph.stream(initial_state):
            self._log_event(event)
            for output in event.values():
                if isinstance(output, dict):
                    final.update(output)
        return final  # type: ignore[return-value]

    @staticmethod
    def _log_event(event: dict) -> None:
        """Log graph stream events."""
        for node_name, output in event.items():
            step = output.get("current_step", node_name) if isinstance(output, dict) else node_name
            logger.info("Completed node: %s", step)
