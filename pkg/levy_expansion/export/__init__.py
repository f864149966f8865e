"""CSV and JSON writers."""

from levy_expansion.export.writers import (
    RunSummary,
    entry_names,
    write_expansion,
    write_order_study,
    write_path_csv,
    write_summary,
    write_trajectory_csv,
)

__all__ = [
    "RunSummary",
    "entry_names",
    "write_expansion",
    "write_order_study",
    "write_path_csv",
    "write_summary",
    "write_trajectory_csv",
]
