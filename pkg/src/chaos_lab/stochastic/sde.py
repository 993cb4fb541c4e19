"""Euler-Maruyama integration of the size diffusion (time unit ``2J = 1``).

``finiteN_dot`` integrates

    dX = -[2X(1 - X^2) + (6/N) X(X^2 - 1)] dt + sqrt((4/N)(1 - X^4)) dB

and ``largeN_det`` the noiseless ``dX = -2X(1 - X^2) dt``.  Values are
clamped to ``|X| <= 1 - 1e-9``; the exact process never leaves
``[-1, 1]`` because the noise vanishes there.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, DomainError
from . import _mc_kernels as K
from .ensemble import EnsembleStats, run_ensemble
from .rng import trajectory_rng

__all__ = ["euler_maruyama", "PROCESSES", "DT_MAX"]

PROCESSES = ("largeN_det", "finiteN_dot")
DT_MAX = 1e-3
_CHUNK = 1 << 16


def _em_task(start, stop, seed, x0, inv_n, noisy, dt, rec_steps):
    out = np.empty((stop - start, rec_steps.size, 1))
    buf = np.empty(rec_steps.size)
    empty = np.empty(0)
    for k, idx in enumerate(range(start, stop)):
        rng = trajectory_rng(seed, idx)
        x, step, rec = x0, 0, 0
        while True:
            z = rng.standard_normal(_CHUNK) if noisy else empty
            status, x, step, rec = K.em_dot(x, step, rec, inv_n, noisy, dt, rec_steps, z, buf)
            if status == K.DONE:
                break
        out[k, :, 0] = buf
    return out


def euler_maruyama(process: str, x0: float, dt: float, t_max: float, ensemble: int, seed: int,
                   N: int = None, n_records: int = 100, record_times=None, workers=None,
                   keep_samples: bool = False) -> EnsembleStats:
    """Ensemble of Euler-Maruyama paths.

    Records on ``n_records + 1`` evenly spaced times, or on ``record_times``
    (rounded to the step grid) when given.
    """
    if process not in PROCESSES:
        raise ConfigurationError(f"process must be one of {PROCESSES}, got {process!r}")
    if not -1.0 < x0 < 1.0:
        raise DomainError(f"x0 must lie in (-1, 1), got {x0!r}")
    if not 0 < dt <= DT_MAX:
        raise ConfigurationError(f"dt must lie in (0, {DT_MAX:g}], got {dt!r}")
    if not t_max > 0:
        raise ConfigurationError("t_max must be positive")
    noisy = process == "finiteN_dot"
    if noisy and (N is None or N < 4):
        raise ConfigurationError("finiteN_dot needs N >= 4")
    inv_n = 1.0 / N if N is not None and noisy else 0.0
    targets = np.linspace(0.0, t_max, n_records + 1) if record_times is None \
        else np.asarray(record_times, dtype=float)
    rec_steps = np.unique(np.rint(targets / dt).astype(np.int64))
    if rec_steps[0] < 0:
        raise ConfigurationError("record times must be non-negative")
    times = rec_steps * dt
    args = (float(x0), float(inv_n), bool(noisy), float(dt), rec_steps)
    return run_ensemble(_em_task, args, times, ensemble, seed, workers, keep_samples)
