"""
Configuration management for levy_expansion.

Loads process-level settings from environment variables with sensible defaults.
Experiment parameters live in levy_expansion.experiment, not here.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Load .env file if it exists
load_dotenv()


class Config:
    """Process-level configuration."""

    # Worker pool
    THREADS: int = int(os.getenv("LEVY_THREADS", "4"))

    # Output
    OUTPUT_DIR: Path = Path(os.getenv("LEVY_OUTPUT_DIR", "results"))

    # Logging
    LOG_LEVEL: str = os.getenv("LEVY_LOG_LEVEL", "INFO").upper()

    # Solver guards
    BLOWUP_THRESHOLD: float = float(os.getenv("LEVY_BLOWUP_THRESHOLD", "1e8"))
    MAX_COMPOSITION_ORDER: int = int(os.getenv("LEVY_MAX_COMPOSITION_ORDER", "12"))

    @classmethod
    def validate(cls) -> None:
        """Validate process configuration."""
        if cls.THREADS < 1:
            raise ValueError(f"LEVY_THREADS must be >= 1, got {cls.THREADS}")
        if not cls.BLOWUP_THRESHOLD > 0:
            raise ValueError("LEVY_BLOWUP_THRESHOLD must be positive")
        if not 2 <= cls.MAX_COMPOSITION_ORDER <= 12:
            raise ValueError("LEVY_MAX_COMPOSITION_ORDER must lie in [2, 12]")

    @classmethod
    def resolve_threads(cls, requested: int | None) -> int:
        """Thread count from an explicit request or the environment default."""
        return max(1, requested if requested else cls.THREADS)

