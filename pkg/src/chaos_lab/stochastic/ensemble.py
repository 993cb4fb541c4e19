"""Ensemble statistics with a worker-independent reduction order.

Trajectories are simulated in fixed blocks of :data:`BLOCK` consecutive
indices.  Each block is reduced to ``(count, mean, M2)`` and the blocks are
merged in index order with the pairwise update of Chan et al., so the
result is bit-identical for any number of workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import ConfigurationError
from .rng import resolve_workers

__all__ = ["BLOCK", "EnsembleStats", "run_ensemble"]

BLOCK = 256


@dataclass(frozen=True)
class EnsembleStats:
    """Per-time, per-site ensemble moments.

    ``mean`` and ``variance`` have shape ``(n_times, n_sites)``;
    ``variance`` is the unbiased sample variance.  ``final`` holds every
    trajectory's state at the last recorded time, ``samples`` (optional)
    the full recorded paths ``(n, n_times, n_sites)``.
    """

    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    n: int
    seed: int
    final: np.ndarray = field(repr=False)
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.variance / self.n)

    def site_average(self) -> np.ndarray:
        return self.mean.mean(axis=1)


def _merge(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * (nb / n), sa + sb + delta * delta * (na * nb / n)


def _run_block(task, start, stop, seed, args, keep):
    paths = task(start, stop, seed, *args)
    x = paths.astype(float)
    m = x.mean(axis=0)
    m2 = ((x - m) ** 2).sum(axis=0)
    return (stop - start, m, m2), paths[:, -1, :].copy(), (paths if keep else None)


def run_ensemble(task: Callable, args: tuple, times: np.ndarray, ensemble: int, seed: int,
                 workers=None, keep_samples: bool = False) -> EnsembleStats:
    """Run ``task(start, stop, seed, *args) -> paths[stop-start, n_times, L]``
    over ``range(ensemble)`` in blocks and reduce.

    ``task`` must be a module-level function so worker processes can import
    it.
    """
    if int(ensemble) != ensemble or ensemble < 1:
        raise ConfigurationError(f"ensemble must be a positive integer, got {ensemble!r}")
    if int(seed) != seed or seed < 0:
        raise ConfigurationError(f"seed must be a non-negative integer, got {seed!r}")
    workers = resolve_workers(workers)
    bounds = [(s, min(s + BLOCK, ensemble)) for s in range(0, ensemble, BLOCK)]
    if workers == 1 or len(bounds) == 1:
        results = [_run_block(task, a, b, seed, args, keep_samples) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_run_block, task, a, b, seed, args, keep_samples)
                    for a, b in bounds]
            results = [f.result() for f in futs]
    acc = results[0][0]
    for r in results[1:]:
        acc = _merge(acc, r[0])
    n, mean, m2 = acc
    var = m2 / (n - 1) if n > 1 else np.zeros_like(m2)
    final = np.concatenate([r[1] for r in results], axis=0)
    samples = np.concatenate([r[2] for r in results], axis=0) if keep_samples else None
    return EnsembleStats(np.asarray(times, dtype=float), mean, var, int(n), int(seed), final,
                         samples)
