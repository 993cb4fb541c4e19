"""Leading large-N solution of the dot.

Small sizes obey a linear birth process, large sizes follow a deterministic
drift, and the two are glued at a crossover size ``s_star`` with
``1 << s_star << N``.  All functions take the coupling ``J`` explicitly;
the Lyapunov exponent is ``8J``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from ..errors import DomainError
from .special import _quad, tricomi_u

__all__ = [
    "LargeNJob",
    "lyapunov_exponent",
    "scrambling_parameter",
    "xi_large_n",
    "small_dist_large_n",
    "flux_large_n",
    "flux_peak_time",
    "otoc_large_n",
    "size_dist_large_n",
    "size_dist_peak",
]


@dataclass(frozen=True)
class LargeNJob:
    """Parameters of a large-N evaluation.

    ``s_star=None`` picks ``max(100, N/100)``, capped at ``N/10`` so that
    small systems still get a valid crossover.
    """

    N: int
    J: float
    r: int = 1
    n: int = 1
    s_star: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise DomainError(f"N must be an even integer >= 4, got {self.N!r}")
        if not self.J > 0:
            raise DomainError(f"J must be positive, got {self.J!r}")
        if int(self.r) != self.r or self.r < 1:
            raise DomainError(f"r must be a positive integer, got {self.r!r}")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a non-negative integer, got {self.n!r}")
        s = self.s_star
        if s is None:
            s = min(max(100.0, self.N / 100.0), self.N / 10.0)
            object.__setattr__(self, "s_star", float(s))
        if not (self.r <= s <= self.N / 10.0):
            raise DomainError(f"need r <= s_star <= N/10, got r={self.r}, s_star={s}, N={self.N}")

    @property
    def lyapunov(self) -> float:
        return 8.0 * self.J


def lyapunov_exponent(J: float) -> float:
    return 8.0 * J


def scrambling_parameter(t, N: int, J: float):
    """``a(t) = N exp(-8 J t) / 8``, the argument of the closed-form OTOC."""
    return N * np.exp(-8.0 * J * np.asarray(t, dtype=float)) / 8.0


def xi_large_n(t, job: LargeNJob):
    """Deterministic trajectory ``-1/sqrt(1 + (4 s*/N) exp(8 J t))``.

    Solves ``xi' = 4 J xi (xi^2 - 1)`` and tends to ``0-`` as ``t -> inf``.
    """
    t = np.asarray(t, dtype=float)
    # log-space keeps large t finite
    q = math.log(4.0 * job.s_star / job.N) + 8.0 * job.J * t
    out = -np.exp(-0.5 * np.logaddexp(0.0, q))
    return out if out.ndim else float(out)


def small_dist_large_n(r: int, s: int, t: float, J: float) -> float:
    """Probability of size ``s`` at time ``t`` for a birth process started
    at size ``r`` (negative-binomial law)."""
    if int(r) != r or int(s) != s or r < 1:
        raise DomainError("r and s must be integers with r >= 1")
    if (s - r) % 2:
        raise DomainError(f"parity mismatch: s={s}, r={r}")
    if t < 0:
        raise DomainError("t must be non-negative")
    if s < r:
        return 0.0
    if t == 0:
        return 1.0 if s == r else 0.0
    k = (s - r) // 2
    log_p = (gammaln(s / 2.0) - gammaln(r / 2.0) - gammaln(k + 1.0)
             - 4.0 * J * r * t + k * math.log(-math.expm1(-8.0 * J * t)))
    return float(math.exp(log_p))


def flux_large_n(t, job: LargeNJob):
    """Probability flux through ``s_star`` per unit time.

    ``8J (s*/2)^(r/2) / Gamma(r/2) exp(-4 J r t) exp(-(s*/2) exp(-8 J t))``;
    defined for all real ``t`` and normalized over the real line.
    """
    t = np.asarray(t, dtype=float)
    r, J, h = job.r, job.J, job.s_star / 2.0
    log_f = (math.log(8.0 * J) + 0.5 * r * math.log(h) - gammaln(r / 2.0)
             - 4.0 * J * r * t - h * np.exp(-8.0 * J * t))
    out = np.exp(log_f)
    return out if out.ndim else float(out)


def flux_peak_time(job: LargeNJob) -> float:
    """``ln(s*/r) / (8J)``, the maximum of :func:`flux_large_n`."""
    return math.log(job.s_star / job.r) / (8.0 * job.J)


def _otoc_integral(t: float, job: LargeNJob) -> float:
    J = job.J
    tp = flux_peak_time(job)
    lo = -math.log(1500.0 / job.s_star) / (8.0 * J) if job.s_star < 1500 else tp - 10.0 / J
    lo = min(lo, tp - 1.0 / J)
    hi = tp + 45.0 / (4.0 * J * job.r)
    # the trajectory crosses over when (4 s*/N) e^{8J(t-t')} ~ 1
    t_cross = t - math.log(job.N / (4.0 * job.s_star)) / (8.0 * J)
    n = job.n

    def f(tp_):
        return flux_large_n(tp_, job) * xi_large_n(t - tp_, job) ** n

    pts = sorted({p for p in (tp, t_cross) if lo < p < hi})
    edges = [lo] + pts + [hi]
    return float(sum(_quad(f, a, b)[0] for a, b in zip(edges[:-1], edges[1:])))


def otoc_large_n(t, job: LargeNJob, mode: str = "closed"):
    """Large-N OTOC ``F_{r,n}(t)`` (signed).

    ``closed``: ``(-1)^n a^(r/2) U(r/2, 1 + (r-n)/2, a)`` with
    ``a = N exp(-8 J t)/8``.  ``integral``: direct quadrature over the
    injection time of flux times ``xi^n``, which depends on ``s_star`` only
    through numerical error.
    """
    if mode not in ("closed", "integral"):
        raise DomainError(f"mode must be 'closed' or 'integral', got {mode!r}")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(ts)
    r, n = job.r, job.n
    for i, ti in enumerate(ts):
        if mode == "closed":
            a = float(scrambling_parameter(ti, job.N, job.J))
            out[i] = (-1.0) ** n * a ** (r / 2.0) * tricomi_u(r / 2.0, 1.0 + (r - n) / 2.0, a)
        else:
            out[i] = _otoc_integral(float(ti), job)
    return out if np.ndim(t) else float(out[0])


def size_dist_large_n(xi, t: float, job: LargeNJob):
    """Density of ``xi = 2m/N`` on ``(-1, 0)`` at time ``t``.

    With ``x = (1 - xi^2)/xi^2`` the density is
    ``2 a^(r/2) / (Gamma(r/2) |xi|^3) x^(r/2 - 1) exp(-a x)``, and zero
    outside ``(-1, 0)``.
    """
    xi = np.asarray(xi, dtype=float)
    a = float(scrambling_parameter(t, job.N, job.J))
    r = job.r
    out = np.zeros_like(xi)
    inside = (xi > -1.0) & (xi < 0.0)
    z = xi[inside]
    x = (1.0 - z * z) / (z * z)
    log_d = (math.log(2.0) + 0.5 * r * math.log(a) - gammaln(r / 2.0) - 3.0 * np.log(-z)
             + (0.5 * r - 1.0) * np.log(x) - a * x)
    out[inside] = np.exp(log_d)
    return out if out.ndim else float(out)


def size_dist_peak(t: float, job: LargeNJob) -> float:
    """Location of the interior maximum of :func:`size_dist_large_n`.

    Stationarity in ``x`` reads ``(3/2)/(1+x) + (r/2 - 1)/x = a``.  Returns
    ``nan`` when the density has no interior maximum (``r = 1`` at small
    ``t`` keeps its integrable peak at ``xi = -1``).
    """
    a = float(scrambling_parameter(t, job.N, job.J))
    r = job.r

    def h(x):
        return 1.5 / (1.0 + x) + (0.5 * r - 1.0) / x - a

    if r == 2:
        x = 1.5 / a - 1.0
        return float(-1.0 / math.sqrt(1.0 + x)) if x > 0 else float("nan")
    if r == 1:
        # h rises to its maximum at x = 1/(sqrt 3 - 1); the density peak is
        # the root beyond it
        x0 = 1.0 / (math.sqrt(3.0) - 1.0)
        if h(x0) <= 0:
            return float("nan")
        hi = x0 * 2.0
        while h(hi) > 0:
            hi *= 2.0
        x = optimize.brentq(h, x0, hi, xtol=1e-14, rtol=1e-14)
    else:
        lo, hi = 1e-300, 1.0
        while h(hi) > 0:
            hi *= 2.0
        x = optimize.brentq(h, lo, hi, xtol=1e-14, rtol=1e-14)
    return float(-1.0 / math.sqrt(1.0 + x))
