"""Monte Carlo sampling of the chain master equation.

Rates come from the exact chain coefficients (:func:`chaos_lab.model.chain_rate_tables`).
The default sampler steps with a fixed ``dt``: each site independently
moves up or down with probability ``rate * dt`` using the rates of the
state at the start of the step.  ``mode='gillespie'`` is the exact
continuous-time reference.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..model import ChainModel, chain_rate_tables
from . import _mc_kernels as K
from .ensemble import EnsembleStats, run_ensemble
from .rng import trajectory_rng

__all__ = ["mc_chain_master", "MAX_STEP_PROBABILITY"]

MAX_STEP_PROBABILITY = 0.1
_CHUNK = 1 << 15


def _chain_task(start, stop, seed, half, n, tables, init, mode, dt, grid):
    L = init.size
    out = np.empty((stop - start, grid.size, L), dtype=np.int64)
    buf = np.empty((grid.size, L), dtype=np.int64)
    chunk = _CHUNK - _CHUNK % L
    for k, idx in enumerate(range(start, stop)):
        rng = trajectory_rng(seed, idx)
        m = init.copy()
        rec = 0
        clock = 0.0 if mode == "gillespie" else 0
        while True:
            u = rng.random(chunk)
            if mode == "gillespie":
                status, clock, rec = K.chain_gillespie(m, clock, rec, half, n, tables, grid, u, buf)
            else:
                status, clock, rec = K.chain_fixed_dt(m, clock, rec, half, n, tables, dt,
                                                      MAX_STEP_PROBABILITY, grid, u, buf)
            if status == K.OVERFLOW:
                raise ConfigurationError(
                    f"rate*dt exceeds {MAX_STEP_PROBABILITY} in state m={m.tolist()}; lower dt")
            if status == K.DONE:
                break
        out[k] = buf
    return out


def mc_chain_master(model: ChainModel, init: Sequence[int], dt: float, t_max: float,
                    ensemble: int, seed: int, mode: str = "fixed_dt", n_records: int = 10,
                    workers=None, keep_samples: bool = False) -> EnsembleStats:
    """Ensemble of chain trajectories started from the size vector ``init``.

    Values are the per-site labels ``m_x``.  ``dt`` is ignored in
    ``gillespie`` mode.
    """
    init = np.asarray(init, dtype=np.int64)
    half = model.N // 2
    if init.shape != (model.sites,):
        raise DomainError(f"init needs {model.sites} entries")
    if np.any(np.abs(init) > half):
        raise DomainError(f"initial sizes {init.tolist()} outside [-N/2, N/2]")
    if not t_max > 0:
        raise ConfigurationError("t_max must be positive")
    tables = chain_rate_tables(model)
    if mode == "fixed_dt":
        if not dt > 0:
            raise ConfigurationError("dt must be positive")
        grid = np.unique(np.rint(np.linspace(0.0, t_max, n_records + 1) / dt).astype(np.int64))
        times = grid * dt
    elif mode == "gillespie":
        grid = times = np.linspace(0.0, t_max, n_records + 1)
        dt = 0.0
    else:
        raise ConfigurationError(f"mode must be 'fixed_dt' or 'gillespie', got {mode!r}")
    args = (half, float(model.N), tables, init, mode, float(dt), grid)
    return run_ensemble(_chain_task, args, times, ensemble, seed, workers, keep_samples)
