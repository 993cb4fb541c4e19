"""Eigen-decomposition of the small-size birth process.

The small-size master equation ``dP(s)/dt = -f(s) P(s) + f(s-2) P(s-2)`` has
a lower-bidiagonal generator, so its spectrum is read off the diagonal and
the eigenvectors are explicit products.  Rates are in the unit ``2J = 1``,
where the leading-order table is ``f(s) = 2s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from ..errors import DegeneracyError, DomainError

__all__ = [
    "BidiagonalSpectrum",
    "bidiagonal_spectrum",
    "rates_large_n",
    "rates_finite_n",
    "S_MAX_DOUBLE",
]

# the alternating left-vector sums lose all digits beyond this cutoff
S_MAX_DOUBLE = 41


def _kahan(values):
    total = np.longdouble(0)
    comp = np.longdouble(0)
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def rates_large_n(s):
    """``f(s) = 2s``."""
    return 2.0 * np.asarray(s, dtype=float)


def rates_finite_n(s, N: int):
    """``f(s) = 2s (1 - 3(s+1)/N)``, the rate with the leading collision
    correction.  Only meaningful for ``s`` well below the vertex at
    ``s ~ N/6``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("sizes must be non-negative")
    out = 2.0 * s * (1.0 - 3.0 * (s + 1.0) / N)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BidiagonalSpectrum:
    """Spectrum on the sizes ``s_min, s_min + 2, ..., S_max``.

    ``right[i, j]`` is ``P_{h_i}(s_j)`` and ``left[i, j]`` is
    ``Ptilde_{h_i}(s_j)``; both are triangular with unit diagonal and held in
    extended precision (``np.longdouble``).  Near ``S_max = 41`` the inner
    products cancel terms of order ``1e8``, so vectors rounded to doubles
    cannot be biorthogonal beyond about ``1e-8``.
    """

    sizes: np.ndarray
    rates: np.ndarray
    eigenvalues: np.ndarray
    right: np.ndarray = field(repr=False)
    left: np.ndarray = field(repr=False)

    def index(self, s: int) -> int:
        j = np.flatnonzero(self.sizes == s)
        if j.size == 0:
            raise DomainError(f"size {s} is not on the spectrum grid")
        return int(j[0])

    def biorthogonality_error(self) -> float:
        """``max |<Ptilde_h, P_h'> - delta_hh'|``."""
        eye = np.eye(self.sizes.size, dtype=np.longdouble)
        return float(np.max(np.abs(self.left @ self.right.T - eye)))

    def reconstruct(self, r: int, t: float) -> np.ndarray:
        """``P(s, t)`` on ``sizes`` for a delta start at ``r``.

        Each entry is ``sum_h Ptilde_h(r) P_h(s) exp(lambda_h t)``,
        accumulated with Kahan summation because the terms alternate in
        sign.
        """
        i_r = self.index(r)
        decay = np.exp(self.eigenvalues.astype(np.longdouble) * np.longdouble(t))
        out = np.zeros(self.sizes.size)
        for j in range(i_r, self.sizes.size):
            terms = self.left[i_r:j + 1, i_r] * self.right[i_r:j + 1, j] * decay[i_r:j + 1]
            out[j] = float(_kahan(terms))
        return out

    def generator(self) -> np.ndarray:
        """Dense lower-bidiagonal generator, for cross-checks."""
        f = self.rates
        G = np.diag(-f)
        G[np.arange(1, f.size), np.arange(f.size - 1)] = f[:-1]
        return G


def bidiagonal_spectrum(rates: Union[Callable, Sequence[float]], S_max: int,
                        s_min: int = 1, N: int = None) -> BidiagonalSpectrum:
    """Eigenvalues and biorthogonal eigenvectors of the bidiagonal generator.

    Parameters
    ----------
    rates
        Callable ``f(s)`` or a table aligned with ``s_min, s_min+2, ...,
        S_max``.
    S_max
        Largest size kept; refused above 41 (cancellation in double
        precision), and above ``N/6`` when ``N`` is given.
    s_min
        Smallest size; sets the parity sector.
    N
        Optional system size, used only to enforce the ``N/6`` ceiling.

    Notes
    -----
    ``lambda_h = -f(h)``,
    ``P_h(s) = prod_{j=h}^{s-2} f(j) / (f(j+2) - f(h))`` and
    ``Ptilde_h(s) = prod_{j=s}^{h-2} f(j) / (f(j) - f(h))`` (steps of 2).
    """
    if int(S_max) != S_max or int(s_min) != s_min or s_min < 0 or S_max < s_min:
        raise DomainError("need integers 0 <= s_min <= S_max")
    if (S_max - s_min) % 2:
        raise DomainError("S_max and s_min must share parity")
    if S_max > S_MAX_DOUBLE:
        raise DomainError(f"S_max={S_max} exceeds the double-precision limit {S_MAX_DOUBLE}")
    if N is not None and S_max > N / 6.0:
        raise DomainError(f"S_max={S_max} is beyond the rate maximum near N/6={N / 6:.1f}")
    sizes = np.arange(s_min, S_max + 1, 2)
    f = np.array([rates(int(s)) for s in sizes], dtype=float) if callable(rates) \
        else np.asarray(rates, dtype=float)
    if f.shape != sizes.shape:
        raise DomainError(f"rate table has {f.size} entries, need {sizes.size}")
    if np.any(np.diff(f) <= 0):
        raise DegeneracyError("rates must be strictly increasing for a simple spectrum")
    n = sizes.size
    fl = f.astype(np.longdouble)
    right = np.zeros((n, n), dtype=np.longdouble)
    left = np.zeros((n, n), dtype=np.longdouble)
    for h in range(n):
        right[h, h] = 1.0
        for j in range(h + 1, n):
            right[h, j] = right[h, j - 1] * fl[j - 1] / (fl[j] - fl[h])
        left[h, h] = 1.0
        for j in range(h - 1, -1, -1):
            left[h, j] = left[h, j + 1] * fl[j] / (fl[j] - fl[h])
    return BidiagonalSpectrum(sizes, f, -f.copy(), right, left)
