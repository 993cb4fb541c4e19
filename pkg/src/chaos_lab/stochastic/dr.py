"""Diffusion-reaction processes dual to the size dynamics.

0d: birth ``m -> m+1`` at rate ``lambda m``, death ``m -> m-1`` at rate
``lambda m (m-1)/N``.  Chain: each step every site draws a multinomial
split of its ``m`` into left copies, right copies, births, deaths and
idlers; copies land on the neighbors while the source keeps its count.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, DomainError
from . import _mc_kernels as K
from .ensemble import EnsembleStats, run_ensemble
from .rng import trajectory_rng

__all__ = [
    "DRParams0d",
    "DRParamsChain",
    "mc_dot_dr",
    "mc_dr_chain",
    "single_scramblon",
    "logistic_solution",
    "dr_chain_mean_field",
    "front_position",
]

_CHUNK = 1 << 15


@dataclass(frozen=True)
class DRParams0d:
    """Rates of the 0d birth-death process.

    ``dt`` is used only by the fixed-step sampler, which needs
    ``lambda dt N <= 0.1`` (the step probability at the typical maximum
    ``m ~ N``).
    """

    lambda_: float
    capacity: int
    dt: Optional[float] = None

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise ConfigurationError(f"lambda must be positive, got {self.lambda_!r}")
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise ConfigurationError(f"capacity must be a positive integer, got {self.capacity!r}")
        if self.dt is not None:
            if not self.dt > 0:
                raise ConfigurationError("dt must be positive")
            if self.lambda_ * self.dt * self.capacity > 0.1 * (1 + 1e-12):
                raise ConfigurationError(
                    f"lambda*dt*N = {self.lambda_ * self.dt * self.capacity:g} exceeds 0.1")


@dataclass(frozen=True)
class DRParamsChain:
    """Per-step rates of the diffusion-reaction chain.

    With ``dt = 1`` the rates are directly the per-step probabilities
    ``lambda dt``, ``p_l dt`` and ``p_r dt``.
    """

    lambda_: float
    p_left: float
    p_right: float
    capacity: int
    sites: int
    dt: float = 1.0

    def __post_init__(self):
        if not self.lambda_ > 0 or self.p_left < 0 or self.p_right < 0:
            raise ConfigurationError("need lambda > 0 and non-negative hopping rates")
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise ConfigurationError("capacity must be a positive integer")
        if int(self.sites) != self.sites or self.sites < 1:
            raise ConfigurationError("sites must be a positive integer")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if (self.lambda_ + self.p_left + self.p_right) * self.dt >= 1.0:
            raise ConfigurationError("(lambda + p_l + p_r) dt must stay below 1")

    @property
    def max_size(self) -> int:
        """Largest ``m`` for which the multinomial weights still sum to <= 1."""
        base = (self.lambda_ + self.p_left + self.p_right) * self.dt
        return int(np.floor((1.0 - base) * self.capacity / (self.lambda_ * self.dt))) + 1


def logistic_solution(t, xi0: float, lambda_: float = 1.0):
    """Solution of ``xi' = lambda xi (1 - xi)``."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-lambda_ * t)
    return xi0 / (xi0 + (1.0 - xi0) * e)


# ---------------------------------------------------------------------------
# 0d


def _record_steps(t_max, dt, n_records):
    steps = np.rint(np.linspace(0.0, t_max, n_records + 1) / dt).astype(np.int64)
    steps = np.unique(steps)
    return steps, steps * dt


def _dr0d_task(start, stop, seed, lam, cap, m0, mode, dt, grid):
    out = np.empty((stop - start, grid.size, 1), dtype=np.int64)
    rec_buf = np.empty(grid.size, dtype=np.int64)
    for k, idx in enumerate(range(start, stop)):
        rng = trajectory_rng(seed, idx)
        m, rec = m0, 0
        clock = 0.0 if mode == "gillespie" else 0
        while True:
            u = rng.random(_CHUNK)
            if mode == "gillespie":
                status, m, clock, rec = K.dr0d_gillespie(m, clock, rec, lam, cap, grid, u, rec_buf)
            else:
                status, m, clock, rec = K.dr0d_fixed_dt(m, clock, rec, lam, cap, dt, grid, u,
                                                        rec_buf)
            if status == K.OVERFLOW:
                raise ConfigurationError(
                    f"step probability exceeds 1 at m={m} (lambda*dt too large)")
            if status == K.DONE:
                break
        out[k, :, 0] = rec_buf
    return out


def mc_dot_dr(params: DRParams0d, m0: int, t_max: float, ensemble: int, seed: int,
              mode: str = "gillespie", n_records: int = 100, workers=None,
              keep_samples: bool = False) -> EnsembleStats:
    """Ensemble of the 0d birth-death process started at ``m0``.

    ``mode='gillespie'`` samples exact waiting times; ``'fixed_dt'`` draws
    at most one event per step of ``params.dt`` with probabilities
    ``rate * dt``.  Values are raw counts ``m`` (divide by ``N`` for
    ``xi``).
    """
    if int(m0) != m0 or m0 < 0:
        raise DomainError(f"m0 must be a non-negative integer, got {m0!r}")
    if not t_max > 0:
        raise ConfigurationError("t_max must be positive")
    if mode == "gillespie":
        times = np.linspace(0.0, t_max, n_records + 1)
        grid, dt = times, 0.0
    elif mode == "fixed_dt":
        if params.dt is None:
            raise ConfigurationError("fixed_dt mode needs params.dt")
        grid, times = _record_steps(t_max, params.dt, n_records)
        dt = params.dt
    else:
        raise ConfigurationError(f"mode must be 'gillespie' or 'fixed_dt', got {mode!r}")
    args = (float(params.lambda_), float(params.capacity), int(m0), mode, float(dt), grid)
    return run_ensemble(_dr0d_task, args, times, ensemble, seed, workers, keep_samples)


# ---------------------------------------------------------------------------
# chain


def _dr_chain_step(rng, m, lam, pl, pr, cap, dt, decay):
    L = m.size
    pv = np.empty((L, 5))
    pv[:, 0] = pl * dt
    pv[:, 1] = pr * dt
    pv[:, 2] = lam * dt
    if decay:
        pv[:, 3] = np.where(m > 0, lam * dt * (m - 1) / cap, 0.0)
    else:
        pv[:, 3] = 0.0
    pv[:, 4] = 1.0 - pv[:, :4].sum(axis=1)
    if np.any(pv[:, 4] < 0):
        x = int(np.argmin(pv[:, 4]))
        raise ConfigurationError(f"multinomial weights exceed 1 at site {x} with m={int(m[x])}")
    d = rng.multinomial(m, pv)
    new = m + d[:, 2] - d[:, 3] + np.roll(d[:, 0], -1) + np.roll(d[:, 1], 1)
    if np.any(new < 0):
        raise RuntimeError("negative occupation in the diffusion-reaction chain")
    return new


def _dr_chain_task(start, stop, seed, lam, pl, pr, cap, dt, decay, init, steps, rec_steps):
    out = np.empty((stop - start, rec_steps.size, init.size), dtype=np.int64)
    for k, idx in enumerate(range(start, stop)):
        rng = trajectory_rng(seed, idx)
        m = init.copy()
        rec = 0
        for step in range(steps + 1):
            if rec < rec_steps.size and rec_steps[rec] == step:
                out[k, rec] = m
                rec += 1
            if step == steps:
                break
            m = _dr_chain_step(rng, m, lam, pl, pr, cap, dt, decay)
    return out


def mc_dr_chain(params: DRParamsChain, init: Sequence[int], steps: int, ensemble: int,
                seed: int, record_every: int = 1, decay: bool = True, workers=None,
                keep_samples: bool = False) -> EnsembleStats:
    """Ensemble of the multinomial diffusion-reaction chain.

    All sites update synchronously from the state at the start of the step.
    ``decay=False`` removes the ``lambda dt (m-1)/N`` channel (pure
    branching).  Values are raw counts per site.
    """
    init = np.asarray(init, dtype=np.int64)
    if init.shape != (params.sites,):
        raise DomainError(f"init needs {params.sites} entries")
    if np.any(init < 0):
        raise DomainError("initial sizes must be non-negative")
    if int(steps) != steps or steps < 0 or int(record_every) != record_every or record_every < 1:
        raise ConfigurationError("steps must be >= 0 and record_every >= 1")
    rec_steps = np.arange(0, steps + 1, record_every, dtype=np.int64)
    if rec_steps[-1] != steps:
        rec_steps = np.append(rec_steps, steps)
    times = rec_steps * params.dt
    args = (float(params.lambda_), float(params.p_left), float(params.p_right),
            float(params.capacity), float(params.dt), bool(decay), init, int(steps), rec_steps)
    return run_ensemble(_dr_chain_task, args, times, ensemble, seed, workers, keep_samples)


def single_scramblon(params: DRParamsChain, xi0: Sequence[float], n_steps: int) -> np.ndarray:
    """Linear growth prediction on the periodic chain.

    Each Fourier mode ``k = 2 pi j / L`` is multiplied by
    ``1 + lambda dt + 2 p dt cos k`` per step.  Returns the profiles for
    steps ``0..n_steps`` with shape ``(n_steps + 1, L)``.
    """
    if params.p_left != params.p_right:
        raise DomainError("single_scramblon needs symmetric hopping p_l == p_r")
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.shape != (params.sites,):
        raise DomainError(f"profile needs {params.sites} entries")
    L = params.sites
    k = 2.0 * np.pi * np.arange(L) / L
    g = 1.0 + params.lambda_ * params.dt + 2.0 * params.p_left * params.dt * np.cos(k)
    x_k = np.fft.fft(xi0)
    n = np.arange(n_steps + 1)[:, None]
    return np.real(np.fft.ifft(x_k[None, :] * g[None, :] ** n, axis=1))


def dr_chain_mean_field(params: DRParamsChain, xi0: Sequence[float], n_steps: int) -> np.ndarray:
    """Discrete-time mean-field map
    ``xi <- xi + lambda dt xi (1 - xi) + p_r dt xi_{x-1} + p_l dt xi_{x+1}``."""
    xi = np.asarray(xi0, dtype=float).copy()
    out = np.empty((n_steps + 1, xi.size))
    out[0] = xi
    lam, pl, pr = params.lambda_ * params.dt, params.p_left * params.dt, params.p_right * params.dt
    for n in range(1, n_steps + 1):
        xi = xi + lam * xi * (1.0 - xi) + pr * np.roll(xi, 1) + pl * np.roll(xi, -1)
        out[n] = xi
    return out


def front_position(profile: np.ndarray, center: int, threshold: float) -> float:
    """Distance from ``center`` to where ``profile`` first drops below
    ``threshold`` moving right, interpolated linearly between sites.

    Returns ``nan`` when the seed site itself is below threshold.
    """
    p = np.asarray(profile, dtype=float)
    L = p.size
    if p[center] < threshold:
        return float("nan")
    for d in range(1, L):
        x = (center + d) % L
        if p[x] < threshold:
            prev = p[(x - 1) % L]
            return d - 1 + (prev - threshold) / (prev - p[x])
    return float(L - 1)
