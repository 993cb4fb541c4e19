"""Leading 1/N corrections for the dot.

The continuous region becomes a Gaussian wave packet with mean ``xi`` and
variance ``eps`` obeying (time unit ``2J = 1``)

    xi'  = (2 - 6/N) xi (xi^2 - 1) + 6 eps xi
    eps' = -4 eps (1 - 3 xi^2) + (4/N)(1 - xi^4)

and the small-size rates pick up a collision term.  Public functions take
``J`` and convert times internally with ``tau = 2 J t``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import integrate

from ..errors import DomainError, IntegrationError, NumericError
from .large_n import LargeNJob, flux_large_n, flux_peak_time, otoc_large_n, size_dist_large_n
from .special import _quad

__all__ = [
    "XiEpsState",
    "xi_eps_rhs",
    "xi_eps_finite_n",
    "xi_finite_n_approx",
    "otoc_finite_n_prediction",
    "otoc_finite_n_integral",
    "size_dist_finite_n",
]


@dataclass(frozen=True)
class XiEpsState:
    """Mean position and variance of the size wave packet."""

    xi: float
    eps: float

    def __post_init__(self):
        if not self.eps >= -1e-15:
            raise DomainError(f"variance must be non-negative, got {self.eps!r}")
        if not abs(self.xi) < 1.0:
            raise DomainError(f"xi must lie in (-1, 1), got {self.xi!r}")


def xi_eps_rhs(N: float, corrections: bool = True):
    """Right-hand side ``(xi, eps) -> (xi', eps')`` in units ``2J = 1``.

    With ``corrections=False`` every 1/N term is dropped, leaving
    ``xi' = 2 xi (xi^2 - 1)`` and a frozen variance.
    """
    inv = 1.0 / N if corrections else 0.0

    def rhs(_t, y):
        xi, eps = y
        if not corrections:
            return [2.0 * xi * (xi * xi - 1.0), 0.0]
        dxi = (2.0 - 6.0 * inv) * xi * (xi * xi - 1.0) + 6.0 * eps * xi
        deps = -4.0 * eps * (1.0 - 3.0 * xi * xi) + 4.0 * inv * (1.0 - xi ** 4)
        return [dxi, deps]

    return rhs


def xi_eps_finite_n(t_grid, N: int, s_star: float, J: float = 0.5,
                    corrections: bool = True, xi0: Optional[float] = None) -> List[XiEpsState]:
    """Integrate the (xi, eps) system on ``t_grid`` (units of ``1/J``).

    Starts from ``xi(0) = 2 s*/N - 1`` (or ``xi0``) and ``eps(0) = 0``; the
    late-time fixed point is ``(0, 1/N)``.  An explicit Runge-Kutta pair
    (order 8) with tight tolerances does the stepping.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) < 0) or t[0] < 0:
        raise DomainError("t_grid must be a non-empty ascending array of times >= 0")
    if not J > 0:
        raise DomainError("J must be positive")
    x0 = 2.0 * s_star / N - 1.0 if xi0 is None else float(xi0)
    tau = 2.0 * J * t
    sol = integrate.solve_ivp(xi_eps_rhs(N, corrections), (0.0, float(tau[-1])), [x0, 0.0],
                              method="DOP853", t_eval=tau, rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise IntegrationError(f"xi/eps integration failed: {sol.message}")
    return [XiEpsState(float(a), float(b)) for a, b in zip(sol.y[0], sol.y[1])]


def xi_finite_n_approx(t, N: int, s_star: float, J: float = 0.5):
    """Closed approximation ``-1/sqrt(1 + (4 s*/N) exp(8 J (1 - 6/N) t))``
    valid once the variance has relaxed to ``1/N``."""
    t = np.asarray(t, dtype=float)
    q = math.log(4.0 * s_star / N) + 8.0 * J * (1.0 - 6.0 / N) * t
    out = -np.exp(-0.5 * np.logaddexp(0.0, q))
    return out if out.ndim else float(out)


def _require_11(job: LargeNJob):
    if (job.r, job.n) != (1, 1):
        raise DomainError("the 1/N OTOC prediction is derived for r = n = 1 only")


def otoc_finite_n_prediction(t, job: LargeNJob):
    """``F_{1,1}((1 - 6/N) t)`` from the closed large-N form."""
    _require_11(job)
    return otoc_large_n(np.asarray(t, dtype=float) * (1.0 - 6.0 / job.N), job, mode="closed")


_HERMITE = np.polynomial.hermite_e.hermegauss(48)


def otoc_finite_n_integral(t, job: LargeNJob):
    """Double-integral form of the corrected ``F_{1,1}``.

    The large-N flux is evaluated at the collision-slowed time
    ``(1 - 3/N) t''`` (with its Jacobian) and smeared over injection time
    by a normalized Gaussian of variance ``3 tau'/(N (1 - 3/N)^2)`` in
    ``tau = 2 J t``.  It is then folded against the trajectory
    ``-1/sqrt(1 + (4 s*/N) exp(8 J (1 - 6/N)(t - t')))``.
    """
    _require_11(job)
    N, J = job.N, job.J
    c3 = 1.0 - 3.0 / N
    nodes, weights = _HERMITE
    weights = weights / weights.sum()

    def smeared_flux(tp):
        var_tau = 3.0 * max(2.0 * J * tp, 0.0) / (N * c3 * c3)
        sd = math.sqrt(var_tau) / (2.0 * J)
        shifted = tp - sd * nodes
        return float(np.dot(weights, c3 * flux_large_n(c3 * shifted, job)))

    tp0 = flux_peak_time(job) / c3
    lo = tp0 - 6.0 / J
    hi = tp0 + 45.0 / (4.0 * J * c3)

    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(ts)
    for i, ti in enumerate(ts):
        def f(tp):
            return smeared_flux(tp) * xi_finite_n_approx(ti - tp, N, job.s_star, J)

        t_cross = ti - math.log(N / (4.0 * job.s_star)) / (8.0 * J * (1.0 - 6.0 / N))
        pts = sorted({p for p in (tp0, t_cross) if lo < p < hi})
        edges = [lo] + pts + [hi]
        out[i] = sum(_quad(f, a, b)[0] for a, b in zip(edges[:-1], edges[1:]))
    return out if np.ndim(t) else float(out[0])


def _quad_abs(f, lo, hi):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return integrate.quad(f, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-10)
        except integrate.IntegrationWarning as exc:
            raise NumericError(f"size density quadrature did not converge: {exc}") from None


def size_dist_finite_n(xi, t: float, job: LargeNJob):
    """Density of ``xi`` with 1/N corrections.

    The large-N density at the rescaled time ``t (1 - 6/N)`` smeared by a
    Gaussian of variance ``1/N``.  Support extends slightly beyond
    ``(-1, 0)``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    N = job.N
    sd = 1.0 / math.sqrt(N)
    t_eff = t * (1.0 - 6.0 / N)
    norm = 1.0 / math.sqrt(2.0 * math.pi) / sd
    out = np.zeros_like(xi)
    for i, x in enumerate(xi):
        lo = max(-1.0, x - 9.0 * sd)
        hi = min(0.0, x + 9.0 * sd)
        if hi <= lo:
            continue

        def f(z):
            return float(size_dist_large_n(z, t_eff, job)) * math.exp(-0.5 * ((x - z) / sd) ** 2)

        if lo == -1.0:
            # z = -1 + u^2 absorbs the (z + 1)^(-1/2) edge singularity at r = 1
            val, _ = _quad_abs(lambda u: 2.0 * u * f(-1.0 + u * u), 0.0, math.sqrt(hi + 1.0))
        else:
            val, _ = _quad_abs(f, lo, hi)
        out[i] = norm * val
    return out if np.ndim(xi) and xi.size > 1 else float(out[0])
