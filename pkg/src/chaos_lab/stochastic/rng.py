"""Counter-based random streams.

Every trajectory owns a Philox stream keyed by ``(seed, index)``, so its
random numbers do not depend on how trajectories are spread over workers.
"""
from __future__ import annotations

import os

import numpy as np

from ..errors import ConfigurationError

__all__ = ["trajectory_rng", "resolve_workers", "THREADS_ENV"]

THREADS_ENV = "CHAOS_LAB_THREADS"
_MASK = (1 << 64) - 1


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for trajectory ``index`` of an ensemble seeded with ``seed``."""
    if int(seed) != seed or int(index) != index or seed < 0 or index < 0:
        raise ConfigurationError("seed and index must be non-negative integers")
    key = np.array([int(seed) & _MASK, int(index) & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def resolve_workers(workers=None) -> int:
    """Worker count from the argument, else ``$CHAOS_LAB_THREADS``, else 1."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if int(workers) != workers or workers < 1:
        raise ConfigurationError(f"worker count must be a positive integer, got {workers!r}")
    return int(workers)
