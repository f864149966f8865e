"""Remainder analysis and order-in-eps studies."""

from levy_expansion.analysis.order_study import (
    QUANTILE_LEVELS,
    ExpansionStatistics,
    OrderFitResult,
    OrderStudyConfig,
    OrderStudyResult,
    expansion_statistics,
    fd_oracle,
    fit_order,
    moment_of_sups,
    path_remainder_sups,
    remainder,
    summarize_order_study,
    sup_moment,
)

__all__ = [
    "QUANTILE_LEVELS",
    "ExpansionStatistics",
    "OrderFitResult",
    "OrderStudyConfig",
    "OrderStudyResult",
    "expansion_statistics",
    "fd_oracle",
    "fit_order",
    "moment_of_sups",
    "path_remainder_sups",
    "remainder",
    "summarize_order_study",
    "sup_moment",
]
