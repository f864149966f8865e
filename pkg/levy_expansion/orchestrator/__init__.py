"""Experiment orchestration."""

from levy_expansion.orchestrator.coordinator import (
    ExperimentOrchestrator,
    RunMetrics,
    RunResult,
)

__all__ = ["ExperimentOrchestrator", "RunMetrics", "RunResult"]
