"""Tests for the experiment orchestrator."""

import csv
import json

import numpy as np
import pytest

from levy_expansion.config import Config
from levy_expansion.core.exceptions import InvalidInputError
from levy_expansion.experiment import ExperimentConfig
from levy_expansion.orchestrator import ExperimentOrchestrator


def _config(tmp_path, **run):
    settings = {
        "T": 0.2,
        "dt": 0.01,
        "paths": 4,
        "n": 1,
        "epsilons": [0.2, 0.1, 0.05, 0.025],
        "threads": 2,
    }
    settings.update(run)
    return ExperimentConfig.model_validate(
        {
            "grid": {"n_nodes": 6},
            "noise": {"intensity": 50.0},
            "run": settings,
            "output": {"directory": str(tmp_path), "max_path_files": 2},
        }
    )


class TestSimulate:
    """Test the simulate command."""

    def test_outputs(self, tmp_path):
        """Test CSV artifacts and the summary."""
        result = ExperimentOrchestrator(_config(tmp_path)).simulate()

        assert result.success
        assert result.summary.status == "ok"
        assert (tmp_path / "phi.csv").exists()
        assert (tmp_path / "u_eps3_path1.csv").exists()
        assert (tmp_path / "path0_jumps.csv").exists()
        assert not (tmp_path / "u_eps0_path2.csv").exists()
        assert result.metrics.paths_completed == 4

        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["command"] == "simulate"
        assert summary["seed_derivation_version"] == 1
        assert len(summary["metrics"]["sup_fourth_moment"]) == 4

    def test_csv_layout(self, tmp_path):
        """Test the header and one row per grid time."""
        ExperimentOrchestrator(_config(tmp_path)).simulate()
        with (tmp_path / "phi.csv").open(newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0][:3] == ["time", "c0_n0", "c0_n1"]
        assert len(rows[0]) == 1 + 12
        assert len(rows) == 1 + 21
        assert float(rows[-1][0]) == 0.2

    def test_blow_up_reported(self, tmp_path, monkeypatch):
        """Test that a blow-up fails the run with a summary."""
        monkeypatch.setattr(Config, "BLOWUP_THRESHOLD", 1e-3)
        result = ExperimentOrchestrator(_config(tmp_path)).simulate()
        assert not result.success
        assert result.summary.status == "failed"
        assert "blew up" in result.errors[0]


class TestExpand:
    """Test the expand command."""

    def test_outputs(self, tmp_path):
        """Test expansion terms and their statistics."""
        result = ExperimentOrchestrator(_config(tmp_path, n=2)).expand()
        assert result.success
        assert (tmp_path / "path0_phi.csv").exists()
        assert (tmp_path / "path1_u2.csv").exists()
        metrics = result.summary.metrics
        assert metrics["order"] == 2
        assert metrics["u2_sup_moment"] > 0
        assert metrics["statistics_epsilon"] == 0.2


class TestOrderStudy:
    """Test the order-study command."""

    def test_reproducible_across_threads(self, tmp_path):
        """Test that thread count and reruns do not change the sups."""
        single = ExperimentOrchestrator(_config(tmp_path / "a"), threads=1).order_study()
        pooled = ExperimentOrchestrator(_config(tmp_path / "b"), threads=3).order_study()
        np.testing.assert_array_equal(single.order_study.sups, pooled.order_study.sups)
        assert (tmp_path / "a" / "order_study.csv").exists()
        assert (tmp_path / "a" / "path_sups.csv").exists()

        document = json.loads((tmp_path / "a" / "order_study.json").read_text())
        assert {"slope", "intercept", "r_squared", "moment_fit"} <= set(document)

    def test_seed_override(self, tmp_path):
        """Test that --seed changes the noise."""
        base = ExperimentOrchestrator(_config(tmp_path / "a")).order_study()
        other = ExperimentOrchestrator(_config(tmp_path / "b"), master_seed=17).order_study()
        assert not np.array_equal(base.order_study.sups, other.order_study.sups)
        assert other.summary.master_seed == 17

    def test_acceptance_recorded(self, tmp_path):
        """Test that success mirrors the acceptance checks."""
        result = ExperimentOrchestrator(_config(tmp_path)).order_study()
        assert result.success == (not result.errors)
        assert result.summary.status == ("ok" if result.success else "failed")

    def test_single_path_is_a_config_error(self, tmp_path):
        """Test that an order study needs two paths."""
        orchestrator = ExperimentOrchestrator(_config(tmp_path, paths=1))
        with pytest.raises(InvalidInputError):
            orchestrator.order_study()

    def test_work_metrics(self, tmp_path):
        """Test that jumps and solves are counted per path."""
        orchestrator = ExperimentOrchestrator(_config(tmp_path))
        result = orchestrator.order_study()
        jumps = sum(orchestrator.sample(index).n_jumps for index in range(4))
        assert jumps > 0
        assert result.metrics.jumps_total == jumps
        assert result.metrics.paths_completed == 4
        assert result.metrics.solves == 1 + 4 * (4 + 1)

    @pytest.mark.parametrize("n", [1, 2])
    def test_reduced_study_reaches_order(self, tmp_path, n):
        """Test the remainder order on 20 coarse-grid FitzHugh-Nagumo paths."""
        cfg = ExperimentConfig.model_validate(
            {
                "grid": {"n_nodes": 8},
                "noise": {"intensity": 5.0},
                "run": {
                    "T": 0.5,
                    "dt": 0.01,
                    "n": n,
                    "paths": 20,
                    "epsilons": [0.2, 0.1, 0.05, 0.025],
                    "threads": 2,
                },
                "output": {"directory": str(tmp_path), "max_path_files": 0},
            }
        )
        outcome = ExperimentOrchestrator(cfg).order_study().order_study
        assert outcome.median_fit.slope >= n + 0.8
        assert outcome.monotone_violation == 0.0


class TestValidate:
    """Test the validate command."""

    def test_fhn_passes(self, tmp_path):
        """Test that the default problem passes every suite."""
        stages = []
        orchestrator = ExperimentOrchestrator(
            _config(tmp_path),
            moment_paths=1000,
            progress_callback=lambda stage, data: stages.append(stage),
        )
        result = orchestrator.validate()
        assert result.success, result.errors
        assert result.validation_result.metrics["decay.gap"] == pytest.approx(0.75, abs=1e-9)
        assert stages[0] == "start"
        assert stages[-1] == "done"

    def test_work_metrics(self, tmp_path):
        """Test that suite paths, jumps and solves reach the run metrics."""
        result = ExperimentOrchestrator(_config(tmp_path), moment_paths=200).validate()
        suites = result.validation_result.metrics
        jumps = suites["moments.jumps"] + suites["coupling.jumps"] + suites["oracle.jumps"]
        assert result.metrics.paths_completed == 200
        assert result.metrics.jumps_total == int(jumps) > 0
        # decay 1, absorption 2, coupling 6, oracle 5
        assert result.metrics.solves == 14


class TestDispatch:
    """Test command dispatch."""

    def test_unknown_command(self, tmp_path):
        """Test that unknown commands are rejected."""
        with pytest.raises(ValueError):
            ExperimentOrchestrator(_config(tmp_path)).run("plot")
