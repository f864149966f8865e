"""
Experiment Orchestrator - Coordinates simulation, expansion and order studies.

This module coordinates:
1. Problem assembly from a validated ExperimentConfig
2. Per-path noise sampling from deterministic streams
3. Path-parallel solves on a thread pool
4. Aggregation, acceptance checks and property validation
5. Metrics tracking (time, paths, jumps)
6. Progress reporting and output emission

Workers only read the shared problem; results are collected in path order, so
outputs do not depend on task completion order.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, TypeVar

import numpy as np

from levy_expansion.analysis.order_study import (
    OrderStudyConfig,
    OrderStudyResult,
    expansion_statistics,
    moment_of_sups,
    path_remainder_sups,
    summarize_order_study,
)
from levy_expansion.config import Config
from levy_expansion.core.data_structures import Trajectory, ValidationResult
from levy_expansion.core.exceptions import LevyExpansionError
from levy_expansion.expansion.hierarchy import expand
from levy_expansion.experiment.schema import ExperimentConfig, build_problem
from levy_expansion.export.writers import (
    RunSummary,
    write_expansion,
    write_order_study,
    write_path_csv,
    write_summary,
    write_trajectory_csv,
)
from levy_expansion.levy.noise import LevyPath, sample_path
from levy_expansion.levy.seeding import path_generator
from levy_expansion.solvers.mild import solve_deterministic, solve_sde
from levy_expansion.validation.validator import DecayChecker, PropertyValidator

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Type alias for progress callback
ProgressCallback = Callable[[str, Dict], None]

# Accepted fraction of the theoretical exponent in an order study
SLOPE_ACCEPTANCE = 0.9
R_SQUARED_ACCEPTANCE = 0.98
MONOTONE_TOLERANCE = 0.05
LOO_TOLERANCE = 0.3


@dataclass
class RunMetrics:
    """Metrics for one command run."""

    # Timing
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    duration_seconds: float = 0.0

    # Work
    paths_completed: int = 0
    jumps_total: int = 0
    solves: int = 0

    def finish(self) -> None:
        """Mark metrics as complete."""
        self.end_time = time.time()
        self.duration_seconds = self.end_time - self.start_time

    def __str__(self) -> str:
        """Format metrics for display."""
        return (
            f"Run Metrics:\n"
            f"  Duration: {self.duration_seconds:.1f}s\n"
            f"  Paths: {self.paths_completed} ({self.jumps_total} jumps)\n"
            f"  Solves: {self.solves}"
        )


@dataclass
class RunResult:
    """Result of one orchestrated command."""

    success: bool
    command: str
    metrics: RunMetrics
    summary: Optional[RunSummary] = None
    validation_result: Optional[ValidationResult] = None
    order_study: Optional[OrderStudyResult] = None
    artifacts: List[Path] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    partial: bool = False


class ExperimentOrchestrator:
    """
    Runs the simulate, expand, order-study and validate commands.

    This orchestrator:
    1. Builds the problem once and shares it read-only across workers
    2. Draws path i from the stream (master_seed, i), independent of eps
    3. Maps per-path tasks over a thread pool sized by config
    4. Writes CSV artifacts and a summary.json from a single writer
    5. Provides progress updates via callbacks
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        output_dir: Optional[Path] = None,
        master_seed: Optional[int] = None,
        threads: Optional[int] = None,
        validator: Optional[PropertyValidator] = None,
        progress_callback: Optional[ProgressCallback] = None,
        moment_paths: int = 10_000,
    ):
        """
        Initialize orchestrator.

        Args:
            cfg: Validated experiment config
            output_dir: Output directory (overrides cfg.output.directory)
            master_seed: Seed override
            threads: Worker count override
            validator: Property validator instance (creates if not provided)
            progress_callback: Optional callback for progress updates
                               Signature: callback(stage: str, data: Dict)
            moment_paths: Paths for the jump-moment calibration in validate
        """
        self.cfg = cfg
        self.problem = build_problem(cfg)
        self.output_dir = Path(output_dir) if output_dir else Path(cfg.output.directory)
        self.master_seed = cfg.run.master_seed if master_seed is None else master_seed
        self.threads = Config.resolve_threads(threads or cfg.run.threads)
        self.validator = validator or PropertyValidator()
        self.progress_callback = progress_callback
        self.moment_paths = moment_paths

    def _report_progress(self, stage: str, **data):
        """Report progress to callback if provided."""
        if self.progress_callback:
            self.progress_callback(stage, data)

    # ===== Shared helpers =====

    @property
    def horizon(self) -> float:
        return self.cfg.run.T

    def sample(self, index: int) -> LevyPath:
        """Path `index`, binned on the run grid."""
        rng = path_generator(self.master_seed, index)
        return sample_path(self.problem.jump_spec, self.horizon, rng, dt=self.cfg.run.dt)

    def _map_paths(self, task: Callable[[int], T], metrics: RunMetrics) -> List[T]:
        """Run task(i) for every path; results come back in path order."""
        count = self.cfg.run.paths
        results: List[T] = []
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for index, value in enumerate(pool.map(task, range(count))):
                results.append(value)
                metrics.paths_completed += 1
                if (index + 1) % max(1, count // 10) == 0 or index + 1 == count:
                    self._report_progress("paths", completed=index + 1, total=count)
        return results

    def _deterministic(self, metrics: RunMetrics) -> Trajectory:
        metrics.solves += 1
        return solve_deterministic(
            self.problem.bundle, self.problem.nonlinearity, self.problem.u0, self.horizon
        )

    def _finish(self, result: RunResult, metrics: Dict) -> RunResult:
        """Write summary.json and attach it to the result."""
        result.metrics.finish()
        if result.success:
            status = "ok"
        else:
            status = "partial" if result.partial else "failed"
        summary = RunSummary(
            command=result.command,
            status=status,
            master_seed=self.master_seed,
            paths=self.cfg.run.paths,
            threads=self.threads,
            duration_seconds=result.metrics.duration_seconds,
            config=self.cfg.echo(),
            metrics=metrics,
            errors=result.errors,
            warnings=result.warnings,
            artifacts=[str(p) for p in result.artifacts],
        )
        result.artifacts.append(write_summary(summary, self.output_dir))
        result.summary = summary
        self._report_progress("done", command=result.command, status=status)
        logger.info(
            "%s finished with status %s in %.1fs",
            result.command,
            status,
            result.metrics.duration_seconds,
        )
        return result

    def _failed(
        self, command: str, metrics: RunMetrics, error: Exception, artifacts: List[Path]
    ) -> RunResult:
        logger.error("%s failed: %s", command, error)
        self._report_progress("error", command=command, error=str(error))
        result = RunResult(
            success=False,
            command=command,
            metrics=metrics,
            artifacts=artifacts,
            errors=[str(error)],
            partial=bool(artifacts),
        )
        return self._finish(result, {})

    # ===== Commands =====

    def simulate(self) -> RunResult:
        """
        phi and u^eps for every eps and path.

        Writes phi.csv, u_eps{j}_path{i}.csv and path{i}_jumps.csv for the first
        output.max_path_files paths, and E[sup_t |u^eps|^4] per eps.
        """
        metrics = RunMetrics()
        artifacts: List[Path] = []
        epsilons = self.cfg.run.epsilons
        stride = self.cfg.output.stride
        exported = self.cfg.output.max_path_files
        self._report_progress("start", command="simulate", paths=self.cfg.run.paths)

        try:
            phi = self._deterministic(metrics)
            artifacts.append(write_trajectory_csv(phi, self.output_dir / "phi.csv", stride))
            problem = self.problem

            def task(index: int):
                path = self.sample(index)
                runs = [
                    solve_sde(problem.bundle, problem.nonlinearity, problem.q, e, problem.u0, path)
                    for e in epsilons
                ]
                return path, runs if index < exported else None, [u.sup_norm() for u in runs]

            outcomes = self._map_paths(task, metrics)
        except LevyExpansionError as e:
            return self._failed("simulate", metrics, e, artifacts)

        sups = np.array([o[2] for o in outcomes])
        for index, (path, runs, _) in enumerate(outcomes):
            metrics.jumps_total += path.n_jumps
            metrics.solves += len(epsilons)
            if runs is None:
                continue
            artifacts.append(write_path_csv(path, self.output_dir / f"path{index}_jumps.csv"))
            for j, u in enumerate(runs):
                target = self.output_dir / f"u_eps{j}_path{index}.csv"
                artifacts.append(write_trajectory_csv(u, target, stride))

        summary: Dict = {"epsilons": list(epsilons), "mean_sup_norm": sups.mean(axis=0).tolist()}
        if sups.shape[0] >= 2:
            moments = [moment_of_sups(sups[:, j], 4) for j in range(len(epsilons))]
            summary["sup_fourth_moment"] = [m[0] for m in moments]
            summary["sup_fourth_moment_se"] = [m[1] for m in moments]
        result = RunResult(success=True, command="simulate", metrics=metrics, artifacts=artifacts)
        return self._finish(result, summary)

    def expand(self) -> RunResult:
        """
        phi, u_1..u_n on every path.

        Writes path{i}_phi.csv, path{i}_u{k}.csv for the first
        output.max_path_files paths, E[sup_t |u_k|^p] per k, and the mean and
        variance of u^eps(T) at the largest eps against the expansion.
        """
        metrics = RunMetrics()
        artifacts: List[Path] = []
        run = self.cfg.run
        problem = self.problem
        epsilon = run.epsilons[0]
        self._report_progress("start", command="expand", paths=run.paths, order=run.n)

        try:
            phi = self._deterministic(metrics)

            def task(index: int):
                path = self.sample(index)
                exp_set = expand(
                    problem.bundle, problem.nonlinearity, problem.q, problem.u0, path, run.n,
                    phi=phi,
                )
                u_eps = solve_sde(
                    problem.bundle, problem.nonlinearity, problem.q, epsilon, problem.u0, path
                )
                return exp_set, u_eps

            outcomes = self._map_paths(task, metrics)
        except LevyExpansionError as e:
            return self._failed("expand", metrics, e, artifacts)

        for index, (exp_set, _) in enumerate(outcomes):
            metrics.jumps_total += exp_set.path.n_jumps
            metrics.solves += run.n + 1
            if index < self.cfg.output.max_path_files:
                artifacts.extend(
                    write_expansion(
                        exp_set, self.output_dir, f"path{index}", self.cfg.output.stride
                    )
                )
                artifacts.append(
                    write_path_csv(exp_set.path, self.output_dir / f"path{index}_jumps.csv")
                )

        summary: Dict = {"order": run.n}
        if run.paths >= 2:
            for k in range(1, run.n + 1):
                sups = np.array([o[0].term(k).sup_norm() for o in outcomes])
                estimate, se = moment_of_sups(sups, run.p)
                summary[f"u{k}_sup_moment"] = estimate
                summary[f"u{k}_sup_moment_se"] = se
            stats = expansion_statistics(
                [o[0] for o in outcomes], [o[1] for o in outcomes], epsilon
            )
            summary["statistics_epsilon"] = epsilon
            summary["mean_error"] = stats.mean_error
            summary["variance_error"] = stats.variance_error
        result = RunResult(success=True, command="expand", metrics=metrics, artifacts=artifacts)
        return self._finish(result, summary)

    def order_study(self) -> RunResult:
        """
        Remainder order in eps over all paths.

        Acceptance: median-sup slope >= 0.9 (n + 1) with r^2 >= 0.98 and
        moment slope >= 0.9 p (n + 1). Monotone-shrinkage violations above 5%
        and leave-one-out slope changes above 0.3 are reported as warnings.
        """
        metrics = RunMetrics()
        artifacts: List[Path] = []
        run = self.cfg.run

        # InvalidInputError here is a configuration problem and propagates
        study = OrderStudyConfig(
            epsilons=tuple(run.epsilons),
            n=run.n,
            p=run.p,
            paths=run.paths,
            horizon=run.T,
            dt=run.dt,
            master_seed=self.master_seed,
        )
        try:
            self._report_progress("start", command="order-study", paths=run.paths, n=run.n)
            phi = self._deterministic(metrics)

            def task(index: int):
                path = self.sample(index)
                return path.n_jumps, path_remainder_sups(self.problem, index, study, phi, path)

            outcomes = self._map_paths(task, metrics)
            for n_jumps, _ in outcomes:
                metrics.jumps_total += n_jumps
                metrics.solves += run.n + len(run.epsilons)
            outcome = summarize_order_study(np.stack([sups for _, sups in outcomes]), study)
        except LevyExpansionError as e:
            return self._failed("order-study", metrics, e, artifacts)

        artifacts.extend(write_order_study(outcome, self.output_dir, self.cfg.echo()))

        result = RunResult(
            success=True,
            command="order-study",
            metrics=metrics,
            artifacts=artifacts,
            order_study=outcome,
        )
        median, moment = outcome.median_fit, outcome.moment_fit
        sup_floor = SLOPE_ACCEPTANCE * study.sup_target
        moment_floor = SLOPE_ACCEPTANCE * study.moment_target
        if median.slope < sup_floor:
            result.errors.append(f"Median-sup slope {median.slope:.3f} below {sup_floor:.2f}")
        if median.r_squared < R_SQUARED_ACCEPTANCE:
            result.errors.append(f"Median-sup fit r^2 = {median.r_squared:.3f} below 0.98")
        if moment.slope < moment_floor:
            result.errors.append(f"Moment slope {moment.slope:.3f} below {moment_floor:.2f}")
        if outcome.monotone_violation > MONOTONE_TOLERANCE:
            result.warnings.append(
                f"{outcome.monotone_violation:.1%} of path-eps pairs grow as eps shrinks"
            )
        if outcome.loo_sensitivity >= LOO_TOLERANCE:
            result.warnings.append(
                f"Leaving one eps out moves the slope by {outcome.loo_sensitivity:.3f}"
            )
        result.success = not result.errors
        return self._finish(result, outcome.to_dict())

    def validate(self) -> RunResult:
        """Run every property suite on the configured problem."""
        metrics = RunMetrics()
        self._report_progress("start", command="validate")
        try:
            validation = self.validator.validate_problem(
                self.problem,
                horizon=self.horizon,
                seed=self.master_seed,
                moment_paths=self.moment_paths,
                absorption_pair=DecayChecker.default_pair(self.problem.layout),
            )
        except LevyExpansionError as e:
            return self._failed("validate", metrics, e, [])

        for key, value in validation.metrics.items():
            name = key.rpartition(".")[2]
            if name == "solves":
                metrics.solves += int(value)
            elif name == "jumps":
                metrics.jumps_total += int(value)
            elif name == "paths":
                metrics.paths_completed += int(value)
        self._report_progress(
            "validation_complete",
            is_valid=validation.is_valid,
            error_count=len(validation.errors),
        )
        result = RunResult(
            success=validation.is_valid,
            command="validate",
            metrics=metrics,
            validation_result=validation,
            errors=list(validation.errors),
            warnings=list(validation.warnings),
        )
        return self._finish(result, dict(validation.metrics))

    def run(self, command: str) -> RunResult:
        """Dispatch one of simulate | expand | order-study | validate."""
        commands = {
            "simulate": self.simulate,
            "expand": self.expand,
            "order-study": self.order_study,
            "validate": self.validate,
        }
        if command not in commands:
            raise ValueError(f"Unknown command {command!r}; expected one of {sorted(commands)}")
        return commands[command]()
