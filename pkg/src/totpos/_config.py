"""
Process-wide numeric settings.

Settings are read once from the environment and cached:

    TOTPOS_THREADS   worker count for grid searches (default 1)

Example:
    >>> from totpos import Settings
    >>> Settings.from_env({"TOTPOS_THREADS": "4"}).threads
    4
"""

from __future__ import annotations

import os
from collections.abc import Mapping
from dataclasses import dataclass, replace
from functools import lru_cache

__all__ = [
    "Settings",
    "get_settings",
    "THREADS_ENV_VAR",
]

THREADS_ENV_VAR = "TOTPOS_THREADS"


@dataclass(frozen=True)
class Settings:
    """Numeric thresholds and parallelism.

    Attributes:
        threads: Maximum worker threads for grid searches.
        tol: Hadamard-relative sign tolerance for float minors.
        rank_rtol: Singular values below rank_rtol * max count as zero.
        psd_rtol: Eigenvalue tolerance, relative to n * max |entry|.
        equal_rtol: Relative tolerance for equal-entry detection.
        max_resolution: Largest Whitney resolution n accepted.

    Example:
        >>> settings = Settings(tol=1e-12)
        >>> settings.with_overrides(threads=2).threads
        2
    """

    threads: int = 1
    tol: float = 1e-9
    rank_rtol: float = 1e-10
    psd_rtol: float = 1e-9
    equal_rtol: float = 1e-12
    max_resolution: int = 10

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise ValueError(f"threads must be a positive integer, got {self.threads}")
        for name in ("tol", "rank_rtol", "psd_rtol", "equal_rtol"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.max_resolution < 1:
            raise ValueError("max_resolution must be at least 1")

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> Settings:
        """Build settings from environment variables.

        Raises:
            ValueError: If TOTPOS_THREADS is not a positive integer.
        """
        environ = os.environ if environ is None else environ
        raw = environ.get(THREADS_ENV_VAR, "").strip()
        if not raw:
            return cls()
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(
                f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}"
            ) from None
        return cls(threads=threads)

    def with_overrides(self, **changes: object) -> Settings:
        return replace(self, **changes)  # type: ignore[arg-type]


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Settings for this process, read from the environment on first use."""
    return Settings.from_env()
