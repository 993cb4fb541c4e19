"""Time integration of the dot and chain master equations.

Times are in the same units as ``1/J``.  Moments are reported in
``xi = 2m/N`` units so finite-N curves compare directly with the large-N
formulas.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .errors import ConfigurationError, DomainError, IntegrationError
from .model import (ChainModel, DotModel, SizeDistribution, SizeGrid, chain_rates,
                    dot_generator_bands)

__all__ = [
    "TimeSeries",
    "EvolveConfig",
    "ChainTrajectory",
    "evolve_dot",
    "otoc_moment",
    "otoc_curve",
    "otoc_curves",
    "generating_function",
    "evolve_chain_exact",
    "chain_state_space",
]

CONSERVATION_DRIFT_MAX = 1e-6
POSITIVITY_FLOOR = -1e-10
EXPM_MAX_POINTS = 2000
CHAIN_STATE_CAP = 2_000_000


@dataclass(frozen=True)
class TimeSeries:
    """Samples ``values[i]`` at ``times[i]``; ``stderr`` is optional."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""
    stderr: Optional[np.ndarray] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise DomainError(f"times {t.shape} and values {v.shape} must be equal 1-d shapes")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise DomainError("times must be strictly ascending")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            e = np.asarray(self.stderr, dtype=float)
            if e.shape != t.shape:
                raise DomainError("stderr must match times")
            object.__setattr__(self, "stderr", e)

    def __len__(self):
        return self.times.size

    def at(self, t: float) -> float:
        """Linear interpolation."""
        return float(np.interp(t, self.times, self.values))


@dataclass(frozen=True)
class EvolveConfig:
    """Integration settings.

    ``dt=None`` picks ``0.05/(J N)``.  For ``rk4`` on a dot the step must
    satisfy ``dt <= 0.1/(J N)``; this is checked when the model is known.
    """

    t_max: float
    dt: Optional[float] = None
    method: str = "rk4"
    record_stride: int = 1

    def __post_init__(self):
        if not self.t_max >= 0:
            raise ConfigurationError(f"t_max must be >= 0, got {self.t_max!r}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt!r}")
        if self.method not in ("rk4", "expm"):
            raise ConfigurationError(f"method must be 'rk4' or 'expm', got {self.method!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigurationError("record_stride must be a positive integer")

    def resolve_dt(self, rate_scale: float) -> float:
        """Step for a generator whose spectral radius is ``~rate_scale``."""
        dt = 0.05 / rate_scale if self.dt is None else self.dt
        if self.method == "rk4" and dt > 0.1 / rate_scale * (1 + 1e-12):
            raise ConfigurationError(
                f"dt={dt:g} exceeds the rk4 stability bound 0.1/(J N) = {0.1 / rate_scale:g}")
        return dt

    def steps(self, rate_scale: float) -> Tuple[int, float]:
        """Number of steps and the step adjusted to land on ``t_max``."""
        dt = self.resolve_dt(rate_scale)
        n = max(int(np.ceil(self.t_max / dt - 1e-9)), 0)
        return n, (self.t_max / n if n else 0.0)


def _check_grid(model: DotModel, grid: SizeGrid):
    if grid.n_fermions != model.N:
        raise DomainError(f"grid has N={grid.n_fermions}, model has N={model.N}")


def _trusted(grid: SizeGrid, p: np.ndarray) -> SizeDistribution:
    # evolved vectors are validated by the caller with the looser evolution
    # tolerances, so skip the constructor checks
    d = object.__new__(SizeDistribution)
    p = np.array(p, dtype=float)
    p.setflags(write=False)
    object.__setattr__(d, "grid", grid)
    object.__setattr__(d, "probs", p)
    return d


def _check_health(snaps: np.ndarray, where: str):
    mass = snaps.sum(axis=-1)
    drift = np.max(np.abs(mass - 1.0))
    if not np.isfinite(drift) or drift > CONSERVATION_DRIFT_MAX:
        raise IntegrationError(f"{where}: probability conservation drift {drift:.3e} "
                               f"exceeds {CONSERVATION_DRIFT_MAX:g}")
    low = snaps.min()
    if low < POSITIVITY_FLOOR:
        raise IntegrationError(f"{where}: negative probability {low:.3e}")


def _record_times(n_steps, stride, dt):
    """Every ``stride``-th step, plus the final step when it is off-stride."""
    idx = np.arange(0, n_steps + 1, stride)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx * dt


def _run_dot(model, grid, p0, cfg, orders=None):
    """Shared driver.  Returns ``(times, snapshots_or_moments, final)``."""
    lower, diag, upper = dot_generator_bands(model, grid)
    rate = model.J * model.N
    if cfg.method == "expm":
        if len(grid) > EXPM_MAX_POINTS:
            raise ConfigurationError(f"expm is limited to {EXPM_MAX_POINTS} grid points")
        n_steps, dt = cfg.steps(rate)
        G = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
        times = _record_times(n_steps, cfg.record_stride, dt)
        snaps = np.array([scipy.linalg.expm(G * t) @ p0 for t in times])
        if orders is not None:
            xi = grid.xi
            snaps = np.stack([snaps @ xi ** k for k in range(orders + 1)], axis=1)
        return times, snaps, None
    n_steps, dt = cfg.steps(rate)
    stride = cfg.record_stride
    times = _record_times(n_steps, stride, dt)
    if orders is None:
        snaps, final = _kernels.rk4_tridiag(lower, diag, upper, p0, dt, n_steps, stride)
        if n_steps % stride:
            snaps = np.vstack([snaps, final[None, :]])
    else:
        snaps, final = _kernels.rk4_tridiag_moments(lower, diag, upper, p0, dt, n_steps,
                                                    stride, grid.xi, orders)
        if n_steps % stride:
            last = np.array([[np.dot(grid.xi ** k, final) for k in range(orders + 1)]])
            snaps = np.vstack([snaps, last])
    return times, snaps, final


def evolve_dot(model: DotModel, init: SizeDistribution, cfg: EvolveConfig
               ) -> List[Tuple[float, SizeDistribution]]:
    """Integrate the dot master equation from ``init``.

    Returns ``(time, distribution)`` pairs every ``cfg.record_stride``
    steps.  Raises :class:`IntegrationError` when total probability drifts
    by more than ``1e-6`` or an entry drops below ``-1e-10``.
    """
    _check_grid(model, init.grid)
    times, snaps, _ = _run_dot(model, init.grid, np.array(init.probs), cfg)
    _check_health(snaps, "evolve_dot")
    return [(float(t), _trusted(init.grid, p)) for t, p in zip(times, snaps)]


def otoc_moment(dist: SizeDistribution, n: int) -> float:
    """``sum_m (2m/N)^n P(m)``."""
    if int(n) != n or n < 0:
        raise DomainError(f"moment order must be a non-negative integer, got {n!r}")
    return float(np.dot(dist.xi ** int(n), dist.probs))


def generating_function(dist: SizeDistribution, nu: float) -> float:
    """``sum_m exp(-nu 2m/N) P(m)``."""
    if abs(nu) > 700.0:
        # |xi| <= 1 so the exponent is bounded by |nu|
        raise DomainError(f"|nu|={abs(nu):g} would overflow the exponential")
    return float(np.dot(np.exp(-nu * dist.xi), dist.probs))


def otoc_curves(model: DotModel, r: int, orders: Sequence[int], cfg: EvolveConfig,
                grid: Optional[SizeGrid] = None) -> Dict[int, TimeSeries]:
    """Signed OTOC moments ``F_{r,n}(t)`` for several ``n`` from one run.

    The run starts from a delta at size ``s = r``.  ``grid`` may be a
    truncated sector to save work at very large ``N``.
    """
    if int(r) != r or r < 1 or r > model.N:
        raise DomainError(f"r must be an integer in [1, N], got {r!r}")
    orders = [int(n) for n in orders]
    if not orders or min(orders) < 1:
        raise DomainError("moment orders must be positive integers")
    grid = SizeGrid.for_size(model.N, r) if grid is None else grid
    _check_grid(model, grid)
    p0 = np.array(SizeDistribution.delta(grid, r).probs)
    times, mom, _ = _run_dot(model, grid, p0, cfg, orders=max(orders))
    drift = np.max(np.abs(mom[:, 0] - 1.0))
    if not drift <= CONSERVATION_DRIFT_MAX:
        raise IntegrationError(f"otoc_curve: probability conservation drift {drift:.3e}")
    return {n: TimeSeries(times, mom[:, n], label=f"F_{{{r},{n}}}") for n in orders}


def otoc_curve(model: DotModel, r: int, n: int, cfg: EvolveConfig,
               grid: Optional[SizeGrid] = None) -> TimeSeries:
    """Signed OTOC moment ``F_{r,n}(t)`` from the exact master equation."""
    return otoc_curves(model, r, [n], cfg, grid)[int(n)]


# ---------------------------------------------------------------------------
# chain


def chain_state_space(model: ChainModel, init: Sequence[int]) -> np.ndarray:
    """All size vectors reachable from ``init`` (one parity sector per site),
    as an ``(n_states, L)`` integer array in lexicographic order."""
    init = np.asarray(init, dtype=np.int64)
    if init.shape != (model.sites,):
        raise DomainError(f"initial state needs {model.sites} entries")
    if np.any(np.abs(init) * 2 > model.N):
        raise DomainError(f"initial sizes {init.tolist()} outside [-N/2, N/2]")
    half = model.N // 2
    per_site = [SizeGrid(model.N, int(m + half) % 2).points for m in init]
    total = int(np.prod([len(p) for p in per_site], dtype=float))
    if total > CHAIN_STATE_CAP:
        raise ConfigurationError(f"chain state space has {total} states, cap is {CHAIN_STATE_CAP}")
    return np.array(list(itertools.product(*per_site)), dtype=np.int64).reshape(total, model.sites)


@dataclass(frozen=True)
class ChainTrajectory:
    """Joint distributions over ``states`` at ``times``."""

    model: ChainModel
    states: np.ndarray
    times: np.ndarray
    probs: np.ndarray = field(repr=False)

    def marginal(self, x: int) -> Tuple[np.ndarray, np.ndarray]:
        """Per-site distribution at site ``x``: ``(m_values, probs[t, value])``."""
        vals, inv = np.unique(self.states[:, x], return_inverse=True)
        out = np.zeros((self.times.size, vals.size))
        for j in range(vals.size):
            out[:, j] = self.probs[:, inv == j].sum(axis=1)
        return vals, out

    def mean_xi(self) -> np.ndarray:
        """Mean of ``2 m_x / N`` per time and site."""
        return self.probs @ (2.0 * self.states / self.model.N)


def _chain_generator(model: ChainModel, states: np.ndarray):
    L = model.sites
    radix = model.N // 2 + 1
    half = model.N // 2
    # encode each state as an integer so neighbor lookup is a searchsorted;
    # within one sector sizes differ by 2, so (m + N/2) // 2 is a digit
    digits = (states + half) // 2
    weights = radix ** np.arange(L)
    codes = digits @ weights
    order = np.argsort(codes)
    sorted_codes = codes[order]
    up, down = chain_rates(model, states)
    rows, cols, vals = [], [], []
    src = np.arange(states.shape[0])
    for x in range(L):
        for rate, step in ((up[:, x], 1), (down[:, x], -1)):
            mask = rate > 0
            tgt_code = codes[mask] + step * weights[x]
            pos = np.searchsorted(sorted_codes, tgt_code)
            rows.append(order[pos])
            cols.append(src[mask])
            vals.append(rate[mask])
    out_rate = up.sum(axis=1) + down.sum(axis=1)
    rows.append(src)
    cols.append(src)
    vals.append(-out_rate)
    n = states.shape[0]
    G = scipy.sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                shape=(n, n))
    return G, float(out_rate.max())


def evolve_chain_exact(model: ChainModel, init: Sequence[int], cfg: EvolveConfig,
                       ) -> ChainTrajectory:
    """Exact joint evolution of a small chain from a product of deltas.

    ``init`` is the initial size vector ``m`` (one entry per site).  The
    default method for chains is the Krylov action of the matrix
    exponential (``cfg.method='expm'``); ``rk4`` steps with
    ``dt <= 0.1 / max exit rate``.
    """
    states = chain_state_space(model, init)
    G, max_rate = _chain_generator(model, states)
    init = np.asarray(init, dtype=np.int64)
    p0 = np.zeros(states.shape[0])
    p0[np.flatnonzero(np.all(states == init, axis=1))] = 1.0
    scale = max(max_rate, 1e-300)
    n_steps, dt = cfg.steps(scale)
    times = _record_times(n_steps, cfg.record_stride, dt)
    if cfg.method == "expm":
        # the last record may be off-stride, so evolve the even part first
        even = times if n_steps % cfg.record_stride == 0 else times[:-1]
        if even.size > 1:
            probs = scipy.sparse.linalg.expm_multiply(G, p0, start=0.0, stop=even[-1],
                                                      num=even.size, endpoint=True)
        else:
            probs = p0[None, :]
        if even.size < times.size:
            last = scipy.sparse.linalg.expm_multiply(G * (times[-1] - even[-1]), probs[-1])
            probs = np.vstack([probs, last[None, :]])
    else:
        probs = np.empty((times.size, p0.size))
        probs[0] = p0
        p = p0.copy()
        rec = 1
        for step in range(1, n_steps + 1):
            k1 = G @ p
            k2 = G @ (p + 0.5 * dt * k1)
            k3 = G @ (p + 0.5 * dt * k2)
            k4 = G @ (p + dt * k3)
            p = p + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if step % cfg.record_stride == 0 or step == n_steps:
                probs[rec] = p
                rec += 1
    drift = np.max(np.abs(probs.sum(axis=1) - 1.0))
    if drift > 1e-8:
        raise IntegrationError(f"evolve_chain_exact: conservation drift {drift:.3e}")
    if probs.min() < POSITIVITY_FLOOR:
        raise IntegrationError(f"evolve_chain_exact: negative probability {probs.min():.3e}")
    return ChainTrajectory(model, states, times, np.asarray(probs))
