"""
Deterministic per-path random streams.

Each Monte Carlo path gets its own counter-based Philox stream keyed by
(master_seed, path_index). The epsilon index is deliberately not part of the
key: every epsilon of an order study replays the same noise path. This
derivation is part of the reproducibility contract and must stay stable.
"""

from typing import Optional

import numpy as np

SEED_DERIVATION_VERSION = 1


def derive_seed(
    master_seed: int, path_index: int, epsilon_index: Optional[int] = None
) -> np.random.SeedSequence:
    """
    Seed for one path.

    Args:
        master_seed: Non-negative experiment seed
        path_index: Monte Carlo path index
        epsilon_index: Accepted for call-site symmetry and ignored

    Returns:
        SeedSequence spawned at key (path_index,) under master_seed
    """
    del epsilon_index
    if master_seed < 0 or path_index < 0:
        raise ValueError("master_seed and path_index must be non-negative")
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(path_index,))


def path_generator(master_seed: int, path_index: int) -> np.random.Generator:
    """Philox generator for one path."""
    return np.random.Generator(np.random.Philox(derive_seed(master_seed, path_index)))
