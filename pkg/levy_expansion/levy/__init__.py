"""Pure-jump Levy noise: jump measures, paths, covariance and seeding."""

from levy_expansion.levy.noise import (
    JumpEmbedding,
    JumpMeasureSpec,
    LevyPath,
    MarkLaw,
    QOperator,
    apply_sqrt_q,
    bin_increments,
    nu_moment,
    nu_signed_mean,
    sample_path,
)
from levy_expansion.levy.seeding import SEED_DERIVATION_VERSION, derive_seed, path_generator

__all__ = [
    "JumpEmbedding",
    "JumpMeasureSpec",
    "LevyPath",
    "MarkLaw",
    "QOperator",
    "SEED_DERIVATION_VERSION",
    "apply_sqrt_q",
    "bin_increments",
    "derive_seed",
    "nu_moment",
    "nu_signed_mean",
    "path_generator",
    "sample_path",
]
