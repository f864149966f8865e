"""
CSV and JSON emission.

CSV files have a header row, `.` decimal separator and shortest round-trip
float formatting, so identical runs produce identical bytes.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from levy_expansion import __version__
from levy_expansion.analysis.order_study import OrderStudyResult
from levy_expansion.core.data_structures import FieldLayout, Trajectory
from levy_expansion.expansion.hierarchy import ExpansionSet
from levy_expansion.levy.noise import LevyPath
from levy_expansion.levy.seeding import SEED_DERIVATION_VERSION


class RunSummary(BaseModel):
    """JSON summary written next to every output bundle."""

    command: str
    status: str = "ok"
    version: str = __version__
    seed_derivation_version: int = SEED_DERIVATION_VERSION
    master_seed: int
    paths: int
    threads: int
    duration_seconds: float = 0.0
    config: Dict[str, Any]
    metrics: Dict[str, Any] = Field(default_factory=dict)
    errors: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)


def entry_names(layout: FieldLayout) -> List[str]:
    """Column names c{component}_n{node}, component-major like the values."""
    return [f"c{c}_n{i}" for c in range(layout.components) for i in range(layout.n_nodes)]


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
            )
    return path


def _strided(n_rows: int, stride: int) -> List[int]:
    """Row indices 0, stride, 2 stride, ... always including the last row."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    indices = list(range(0, n_rows, stride))
    if indices[-1] != n_rows - 1:
        indices.append(n_rows - 1)
    return indices


def write_trajectory_csv(trajectory: Trajectory, path: Path, stride: int = 1) -> Path:
    """
    One row per (thinned) grid time: time, then every entry of the state.

    Args:
        trajectory: Trajectory to export
        path: Target file
        stride: Keep every stride-th time (the final time is always kept)

    Returns:
        Path written
    """
    header = ["time"] + entry_names(trajectory.layout)
    rows = (
        [trajectory.times[m], *trajectory.states[m]]
        for m in _strided(len(trajectory.times), stride)
    )
    return _write_rows(Path(path), header, rows)


def write_expansion(
    exp_set: ExpansionSet, directory: Path, stem: str = "path0", stride: int = 1
) -> List[Path]:
    """Write phi and u_1..u_n as {stem}_phi.csv, {stem}_u1.csv, ..."""
    directory = Path(directory)
    written = [write_trajectory_csv(exp_set.phi, directory / f"{stem}_phi.csv", stride)]
    for k in range(1, exp_set.order + 1):
        written.append(
            write_trajectory_csv(exp_set.term(k), directory / f"{stem}_u{k}.csv", stride)
        )
    return written


def write_path_csv(path: LevyPath, file: Path) -> Path:
    """Jump list of a path: jump_time, mark_norm."""
    norms = path.layout.norms(path.marks) if path.n_jumps else np.zeros(0)
    return _write_rows(Path(file), ["jump_time", "mark_norm"], zip(path.jump_times, norms))


def write_order_study(
    result: OrderStudyResult, directory: Path, config: Optional[Dict[str, Any]] = None
) -> List[Path]:
    """
    order_study.csv (one row per eps), path_sups.csv (one row per path) and
    order_study.json (fits, diagnostics, config echo).
    """
    directory = Path(directory)
    rows = result.rows()
    header = list(rows[0].keys())
    table = _write_rows(
        directory / "order_study.csv", header, ([row[k] for k in header] for row in rows)
    )

    sup_header = ["path"] + [f"eps_{e!r}" for e in result.study.epsilons]
    sups = _write_rows(
        directory / "path_sups.csv",
        sup_header,
        ([i, *map(float, row)] for i, row in enumerate(result.sups)),
    )

    document = result.to_dict()
    document["epsilons"] = list(result.study.epsilons)
    document["master_seed"] = result.study.master_seed
    document["version"] = __version__
    if config is not None:
        document["config"] = config
    summary = directory / "order_study.json"
    summary.write_text(json.dumps(document, indent=2), encoding="utf-8")
    return [table, sups, summary]


def write_summary(summary: RunSummary, directory: Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / "summary.json"
    target.write_text(summary.model_dump_json(indent=2), encoding="utf-8")
    return target
