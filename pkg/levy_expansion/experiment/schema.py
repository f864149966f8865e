"""
Experiment configuration schema.

Documents are TOML (or JSON) with the sections

    [problem]  preset, rate, polynomial, u0
    [grid]     n_nodes
    [fhn]      xi, c, p, gamma, alpha, allow_zero_potential
    [noise]    intensity, mark_law, mark_scale, embedding, modes, q_trace,
               q_diagonal, components
    [run]      T, dt, n, p, epsilons, paths, master_seed, threads
    [output]   directory, stride, max_path_files

Unknown keys are rejected. Every section and key is optional; missing values
take the FitzHugh-Nagumo defaults.
"""

import json
import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from levy_expansion.config import Config
from levy_expansion.core.data_structures import (
    EmbeddingKind,
    Field as StateField,
    MarkLawKind,
    PresetName,
    ValidationResult,
)
from levy_expansion.core.exceptions import ConfigError, InvalidInputError
from levy_expansion.levy.noise import JumpEmbedding, MarkLaw, QOperator
from levy_expansion.presets.library import PresetLibrary, Problem

logger = logging.getLogger(__name__)

CoefficientSpec = Union[float, List[float]]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemSection(StrictModel):
    preset: PresetName = PresetName.FHN
    rate: float = Field(1.0, gt=0, description="scalar preset: A = -rate")
    polynomial: Optional[List[float]] = Field(
        None, description="reaction_diffusion preset: ascending coefficients of g"
    )
    u0: Optional[List[float]] = Field(None, description="constant initial value per component")


class GridSection(StrictModel):
    n_nodes: int = Field(32, ge=3)


class FhnSection(StrictModel):
    xi: float = 0.5
    c: CoefficientSpec = 1.0
    p: CoefficientSpec = 1.0
    gamma: float = Field(1.0, gt=0)
    alpha: float = Field(1.0, gt=0)
    allow_zero_potential: bool = False

    @field_validator("xi")
    @classmethod
    def xi_in_unit_interval(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError(f"xi must lie in (0, 1), got {value}")
        return value


class NoiseSection(StrictModel):
    intensity: float = Field(5.0, gt=0)
    mark_law: MarkLawKind = MarkLawKind.TWO_POINT
    mark_scale: float = Field(1.0, gt=0)
    embedding: EmbeddingKind = EmbeddingKind.FIXED_PROFILE
    modes: int = Field(1, ge=1)
    q_trace: float = Field(1.0, ge=0)
    q_diagonal: Optional[List[float]] = None
    components: List[int] = Field(default_factory=lambda: [0])


class RunSection(StrictModel):
    T: float = Field(0.5, gt=0)
    dt: float = Field(1e-3, gt=0)
    n: int = Field(1, ge=1, le=12)
    p: int = Field(2, ge=2)
    epsilons: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    paths: int = Field(100, ge=1)
    master_seed: int = Field(0, ge=0)
    threads: Optional[int] = Field(None, ge=1)

    @field_validator("p")
    @classmethod
    def p_even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"moment exponent must be even, got {value}")
        return value

    @field_validator("epsilons")
    @classmethod
    def epsilons_decreasing(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one epsilon is required")
        if any(not 0 < e <= 1 for e in value):
            raise ValueError("epsilons must lie in (0, 1]")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        return value

    @model_validator(mode="after")
    def dt_divides_t(self) -> "RunSection":
        ratio = self.T / self.dt
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"dt = {self.dt} does not divide T = {self.T}")
        return self


class OutputSection(StrictModel):
    directory: str = Field(default_factory=lambda: str(Config.OUTPUT_DIR))
    stride: int = Field(1, ge=1)
    max_path_files: int = Field(1, ge=0)


class ExperimentConfig(StrictModel):
    """Fully validated experiment document."""

    problem: ProblemSection = Field(default_factory=ProblemSection)
    grid: GridSection = Field(default_factory=GridSection)
    fhn: FhnSection = Field(default_factory=FhnSection)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    run: RunSection = Field(default_factory=RunSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def cross_section_checks(self) -> "ExperimentConfig":
        if self.problem.preset is PresetName.REACTION_DIFFUSION and not self.problem.polynomial:
            raise ValueError("problem.polynomial is required for the reaction_diffusion preset")
        if self.problem.preset is not PresetName.FHN and self.noise.components != [0]:
            raise ValueError(
                f"noise.components must be [0] for the single-component "
                f"{self.problem.preset.value} preset, got {self.noise.components}"
            )
        if self.noise.embedding is EmbeddingKind.FIXED_PROFILE and self.noise.modes > 1:
            raise ValueError(
                f'noise.modes = {self.noise.modes} needs noise.embedding = "mode_spread"'
            )
        for name in ("c", "p"):
            value = getattr(self.fhn, name)
            if isinstance(value, list) and len(value) != self.grid.n_nodes:
                raise ValueError(
                    f"fhn.{name} table has {len(value)} entries, grid.n_nodes is {self.grid.n_nodes}"
                )
        return self

    def echo(self) -> dict:
        """Fully resolved document for output bundles."""
        return self.model_dump(mode="json")


def _coefficient(value: CoefficientSpec) -> Union[float, np.ndarray]:
    return np.asarray(value, dtype=float) if isinstance(value, list) else float(value)


def _min_coefficient(value: CoefficientSpec) -> float:
    return float(np.min(value)) if isinstance(value, list) else float(value)


def build_problem(cfg: ExperimentConfig) -> Problem:
    """
    Instantiate the preset a config describes.

    Raises:
        InvalidInputError: parameters the schema cannot see are inconsistent
            (for example a Q diagonal of the wrong length)
    """
    noise = cfg.noise
    mark_law = MarkLaw(noise.mark_law, noise.mark_scale)
    preset = cfg.problem.preset

    if preset is PresetName.SCALAR:
        u0 = cfg.problem.u0[0] if cfg.problem.u0 else 0.0
        return PresetLibrary.create_scalar(
            rate=cfg.problem.rate,
            xi=cfg.fhn.xi,
            dt=cfg.run.dt,
            intensity=noise.intensity,
            mark_law=mark_law,
            q_scale=noise.q_diagonal[0] if noise.q_diagonal else noise.q_trace,
            u0=u0,
        )

    if preset is PresetName.REACTION_DIFFUSION:
        problem = PresetLibrary.create_reaction_diffusion(
            polynomial=cfg.problem.polynomial or [],
            n_nodes=cfg.grid.n_nodes,
            dt=cfg.run.dt,
            c=_coefficient(cfg.fhn.c),
            p=_coefficient(cfg.fhn.p),
            intensity=noise.intensity,
            mark_law=mark_law,
            modes=noise.modes,
            q_trace=noise.q_trace,
            u0_value=cfg.problem.u0[0] if cfg.problem.u0 else 0.0,
        )
    else:
        problem = PresetLibrary.create_fhn(
            n_nodes=cfg.grid.n_nodes,
            dt=cfg.run.dt,
            xi=cfg.fhn.xi,
            c=_coefficient(cfg.fhn.c),
            p=_coefficient(cfg.fhn.p),
            gamma=cfg.fhn.gamma,
            alpha=cfg.fhn.alpha,
            intensity=noise.intensity,
            mark_law=mark_law,
            q_trace=noise.q_trace,
            noise_components=noise.components,
            allow_zero_potential=cfg.fhn.allow_zero_potential,
        )
        if cfg.problem.u0:
            problem = replace(problem, u0=StateField.constant(problem.layout, cfg.problem.u0))

    layout = problem.layout
    if noise.embedding is EmbeddingKind.MODE_SPREAD:
        embedding = JumpEmbedding.cosine_modes(layout, noise.modes, noise.components)
    else:
        profile = [1.0 if c in noise.components else 0.0 for c in range(layout.components)]
        embedding = JumpEmbedding.fixed_profile(StateField.constant(layout, profile))
    problem = replace(problem, jump_spec=replace(problem.jump_spec, embedding=embedding))

    if noise.q_diagonal is not None:
        problem = replace(problem, q=QOperator(np.asarray(noise.q_diagonal, dtype=float)))
    if problem.q.size != problem.layout.size:
        raise InvalidInputError(
            f"noise.q_diagonal has {problem.q.size} entries, the field has {problem.layout.size}"
        )
    return problem


def _format_errors(error: ValidationError) -> List[str]:
    problems = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<document>"
        problems.append(f"{path}: {item['msg']}")
    return problems


def _parse(text: str, fmt: Optional[str]) -> dict:
    fmt = fmt or ("json" if text.lstrip().startswith("{") else "toml")
    try:
        if fmt == "json":
            return json.loads(text)
        return tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError([f"<document>: {e}"]) from e


def load_config(text: str, fmt: Optional[str] = None) -> Tuple[ExperimentConfig, ValidationResult]:
    """
    Parse and validate an experiment document.

    Args:
        text: TOML or JSON document
        fmt: "toml" or "json"; sniffed from the text when omitted

    Returns:
        (config, report); the report carries omega, eta and omega - eta and
        warns when the drift is not dissipative or the FHN admissibility
        condition xi^2 - xi + 1 <= 3 min p fails

    Raises:
        ConfigError: unparsable document, unknown keys or violated constraints
    """
    try:
        cfg = ExperimentConfig.model_validate(_parse(text, fmt))
    except ValidationError as e:
        raise ConfigError(_format_errors(e)) from e

    try:
        problem = build_problem(cfg)
    except InvalidInputError as e:
        raise ConfigError([f"problem: {e}"]) from e

    report = ValidationResult(is_valid=True)
    report.metrics.update({"omega": problem.omega, "eta": problem.eta, "gap": problem.gap})
    if problem.gap <= 0:
        report.add_warning(
            f"omega - eta = {problem.gap:.4g} <= 0: the drift is not dissipative"
        )
        report.add_suggestion("Increase p (or alpha) or pick xi closer to 1/2")
    if cfg.problem.preset is PresetName.FHN:
        xi = cfg.fhn.xi
        if xi * xi - xi + 1.0 > 3.0 * _min_coefficient(cfg.fhn.p):
            report.add_warning(
                f"xi^2 - xi + 1 = {xi * xi - xi + 1.0:.4g} exceeds 3 min p; "
                "the expansion bounds are not covered"
            )
    logger.info(
        "Loaded %s config: omega=%.4g eta=%.4g gap=%.4g",
        cfg.problem.preset.value,
        problem.omega,
        problem.eta,
        problem.gap,
    )
    return cfg, report


def load_config_file(path: Union[str, Path]) -> Tuple[ExperimentConfig, ValidationResult]:
    """load_config on a file; the format follows the suffix (.json or TOML)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"<file>: {e}"], source=str(path)) from e
    try:
        return load_config(text, "json" if path.suffix.lower() == ".json" else "toml")
    except ConfigError as e:
        raise ConfigError(e.problems, source=str(path)) from e
