"""LangGraph definition of the end-to-end experiment.

  Simulate → [phantoms configured?] → Extract phantoms → Build → Transfer → Report
                     └──────────────── no ──────────────┘

Each node wraps one stage; all nodes write into the same output directory.
"""

from __future__ import annotations

import logging

from langgraph.graph import END, START, StateGraph

from core.state import ExperimentState
from stages.build import BuildStage
from stages.extract import PhantomExtractStage
from stages.report import ReportStage
from stages.simulate import SimulateStage
from stages.transfer import TransferStage

logger = logging.getLogger(__name__)

# Instantiate stages
_simulate = SimulateStage()
_extract_phantoms = PhantomExtractStage()
_build = BuildStage()
_transfer = TransferStage()
_report = ReportStage()


# --- Node functions ---

def simulate_node(state: ExperimentState) -> dict:
    logger.info("Running: simulate")
    return _simulate.run(state)


def extract_phantoms_node(state: ExperimentState) -> dict:
    logger.info("Running: extract_phantoms (%d phantoms)", state["config"].phantoms.count)
    return _extract_phantoms.run(state)


def build_node(state: ExperimentState) -> dict:
    logger.info("Running: build (%d cohorts)", len(state["cohorts"]))
    return _build.run(state)


def transfer_node(state: ExperimentState) -> dict:
    logger.info("Running: transfer")
    return _transfer.run(state)


def report_node(state: ExperimentState) -> dict:
    logger.info("Running: report")
    return _report.run(state)


# --- Routing functions ---

def route_after_simulate(state: ExperimentState) -> str:
    """Route after Simulate: phantom batch configured → extract_phantoms, else → build."""
    if state["config"].phantoms.count > 0:
        return "extract_phantoms"
    return "build"


# --- Graph builder ---

def build_graph():
    """Build and return the compiled experiment graph."""
    graph = StateGraph(ExperimentState)

    # Add nodes
    graph.add_node("simulate", simulate_node)
    graph.add_node("extract_phantoms", extract_phantoms_node)
    graph.add_node("build", build_node)
    graph.add_node("transfer", transfer_node)
    graph.add_node("report", report_node)

    # Linear edges
    graph.add_edge(START, "simulate")
    graph.add_edge("extract_phantoms", "build")
    graph.add_edge("build", "transfer")
    graph.add_edge("transfer", "report")
    graph.add_edge("report", END)

    # Conditional edges
    graph.add_conditional_edges("simulate", route_after_simulate, ["extract_phantoms", "build"])

    return graph.compile()
