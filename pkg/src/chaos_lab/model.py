"""Model parameters, the operator-size grid and exact master-equation rates.

Sizes are labelled either by ``m`` in ``[-N/2, N/2]`` (the ``L_z`` eigenvalue)
or by ``s = m + N/2`` (number of Majorana factors).  Every transition changes
``m`` by two, so a run lives on a single parity sector of ``s``.

Generator convention: ``G[i, j]`` is the rate from grid point ``j`` into grid
point ``i``; columns sum to zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "DotModel",
    "ChainModel",
    "SizeGrid",
    "SizeDistribution",
    "TransitionSet",
    "ladder_coeffs",
    "dot_coeffs",
    "dot_coeffs_exact",
    "dot_generator_bands",
    "build_dot_generator",
    "build_dot_generator_exact",
    "chain_rates",
    "chain_transitions",
    "chain_rate_tables",
]


def _check_n(n: int) -> None:
    if int(n) != n or n < 4 or n % 2:
        raise DomainError(f"N must be an even integer >= 4, got {n!r}")


@dataclass(frozen=True)
class DotModel:
    """Single Brownian SYK dot with ``N`` Majoranas and coupling ``J``."""

    n_fermions: int
    coupling: float = 1.0
    body_count: int = 4

    def __post_init__(self):
        _check_n(self.n_fermions)
        if not self.coupling > 0:
            raise DomainError(f"coupling J must be positive, got {self.coupling!r}")
        if self.body_count != 4:
            raise DomainError("only p = 4 body interactions are supported")

    @property
    def N(self) -> int:
        return self.n_fermions

    @property
    def J(self) -> float:
        return self.coupling


@dataclass(frozen=True)
class ChainModel:
    """Periodic chain of ``sites`` dots with on-site ``J1`` and bond ``J2``.

    ``J1 = 0`` or ``J2 = 0`` are accepted so the decoupled and pure-bond
    limits can be studied; at least one must be positive.
    """

    sites: int
    n_fermions: int
    onsite_coupling: float = 1.0
    bond_coupling: float = 1.0
    boundary: str = "periodic"

    def __post_init__(self):
        _check_n(self.n_fermions)
        if int(self.sites) != self.sites or self.sites < 2:
            raise DomainError(f"sites must be an integer >= 2, got {self.sites!r}")
        if self.onsite_coupling < 0 or self.bond_coupling < 0:
            raise DomainError("couplings must be non-negative")
        if self.onsite_coupling == 0 and self.bond_coupling == 0:
            raise DomainError("at least one coupling must be positive")
        if self.boundary != "periodic":
            raise DomainError("only periodic boundaries are implemented")

    @property
    def N(self) -> int:
        return self.n_fermions

    def site_model(self) -> DotModel:
        return DotModel(self.n_fermions, self.onsite_coupling or 1.0)


@dataclass(frozen=True)
class SizeGrid:
    """Parity sector of the size ladder of one dot.

    ``m_max`` optionally truncates the ladder from above.  A truncated grid is
    closed: transitions leaving it are dropped from the diagonal as well, so
    probability stays conserved.
    """

    n_fermions: int
    parity: int
    m_max: Optional[int] = None

    def __post_init__(self):
        _check_n(self.n_fermions)
        if self.parity not in (0, 1):
            raise DomainError(f"parity must be 0 or 1, got {self.parity!r}")
        if self.m_max is not None:
            lo = -self.n_fermions // 2 + self.parity
            if self.m_max < lo or self.m_max > self.n_fermions // 2:
                raise DomainError(f"m_max={self.m_max} leaves an empty grid")

    @classmethod
    def for_size(cls, n_fermions: int, s: int, m_max: Optional[int] = None) -> "SizeGrid":
        """Grid of the sector containing size ``s``."""
        return cls(n_fermions, int(s) % 2, m_max)

    @classmethod
    def truncated(cls, n_fermions: int, s: int, xi_max: float) -> "SizeGrid":
        """Sector of ``s`` cut at ``xi = 2m/N <= xi_max``."""
        m_max = int(np.floor(xi_max * n_fermions / 2))
        m_max = min(m_max, n_fermions // 2)
        return cls(n_fermions, int(s) % 2, m_max)

    @property
    def is_truncated(self) -> bool:
        return self.m_max is not None and self.m_max < self.top_of_sector

    @property
    def top_of_sector(self) -> int:
        return self.n_fermions // 2 - self.parity

    @property
    def points(self) -> np.ndarray:
        half = self.n_fermions // 2
        lo = -half + self.parity
        hi = half if self.m_max is None else self.m_max
        pts = np.arange(lo, hi + 1, 2, dtype=np.int64)
        return pts

    @property
    def sizes(self) -> np.ndarray:
        return self.points + self.n_fermions // 2

    @property
    def xi(self) -> np.ndarray:
        return 2.0 * self.points / self.n_fermions

    def __len__(self) -> int:
        return len(self.points)

    def index_of_size(self, s: int) -> int:
        if s % 2 != self.parity:
            raise DomainError(f"size {s} is not in parity sector {self.parity}")
        i = (s - self.parity) // 2
        if i < 0 or i >= len(self):
            raise DomainError(f"size {s} is outside the grid")
        return int(i)


@dataclass(frozen=True)
class SizeDistribution:
    """Probability vector on a :class:`SizeGrid`, normalized at construction."""

    grid: SizeGrid
    probs: np.ndarray = field(repr=False)

    TOL_NEG = 1e-12

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.shape != (len(self.grid),):
            raise DomainError(f"probs has shape {p.shape}, grid has {len(self.grid)} points")
        if p.min() < -self.TOL_NEG:
            raise DomainError(f"negative probability {p.min():.3e}")
        total = p.sum()
        if not total > 0:
            raise DomainError("distribution has zero total mass")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def delta(cls, grid: SizeGrid, s: int) -> "SizeDistribution":
        p = np.zeros(len(grid))
        p[grid.index_of_size(s)] = 1.0
        return cls(grid, p)

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi

    def mean_size(self) -> float:
        return float(np.dot(self.grid.sizes, self.probs))


@dataclass(frozen=True)
class TransitionSet:
    """Outgoing transitions of one lattice state at one site.

    ``deltas`` are changes of the size vector ``m`` (length ``L``), ``rates``
    the matching non-negative rates, ``diagonal`` minus their sum.
    """

    deltas: tuple
    rates: tuple
    diagonal: float

    def total_rate(self) -> float:
        return float(sum(self.rates))


# ---------------------------------------------------------------------------
# ladder rules


def _check_m(n: int, m) -> None:
    arr = np.asarray(m)
    if np.any(np.abs(arr) * 2 > n):
        raise DomainError(f"m={m!r} outside [-N/2, N/2] for N={n}")


def _fp(n, m):
    return m + n // 2 + 1


def _fm(n, m):
    return n // 2 - m + 1


def _a1(n, m):
    return _fp(n, m) * _fp(n, m + 1)


def _a2(n, m):
    return _fp(n, m) * _fm(n, m + 1) + _fm(n, m) * _fp(n, m - 1)


def _a3(n, m):
    return _fm(n, m) * _fm(n, m - 1)


def ladder_coeffs(N: int, m: int):
    """Ladder amplitudes ``(f_plus, f_minus, a1, a2, a3)`` at size label ``m``.

    ``f_plus`` and ``f_minus`` are the coefficients of ``|m+1)`` and ``|m-1)``
    in ``2 L_x |m)``; the ``a`` products are the ``|m+2)``, ``|m)`` and
    ``|m-2)`` amplitudes of ``4 L_x^2 |m)``.  Integer inputs give exact
    integer outputs.
    """
    _check_n(N)
    _check_m(N, m)
    return _fp(N, m), _fm(N, m), _a1(N, m), _a2(N, m), _a3(N, m)


def dot_coeffs_exact(N: int, m: int):
    """``(C0, Cplus, Cminus)`` in units of ``J`` as exact fractions."""
    _check_n(N)
    _check_m(N, m)
    n3 = N ** 3
    c0 = Fraction((2 * m - N) * (2 * m + N) * (4 * m * m + N * N - 6 * N + 8), 2 * n3)
    cp = Fraction(-(2 * m - N + 4) * (2 * m + N) * (2 * m + N + 2) * (2 * m + N + 4), 4 * n3)
    cm = Fraction(-(2 * m - N - 4) * (2 * m - N - 2) * (2 * m - N) * (2 * m + N - 4), 4 * n3)
    return c0, cp, cm


def _dot_coeffs_array(N: int, J: float, m: np.ndarray):
    m = np.asarray(m, dtype=float)
    n3 = float(N) ** 3
    c0 = (2 * m - N) * (2 * m + N) * (4 * m * m + N * N - 6 * N + 8) / (2 * n3)
    cp = -(2 * m - N + 4) * (2 * m + N) * (2 * m + N + 2) * (2 * m + N + 4) / (4 * n3)
    cm = -(2 * m - N - 4) * (2 * m - N - 2) * (2 * m - N) * (2 * m + N - 4) / (4 * n3)
    return J * c0, J * cp, J * cm


def dot_coeffs(model: DotModel, m: int):
    """Master-equation coefficients at ``m``.

    ``Cplus`` multiplies ``P(m+2)`` and ``Cminus`` multiplies ``P(m-2)`` in
    the equation for ``dP(m)/dt``; ``C0`` multiplies ``P(m)``.
    """
    c0, cp, cm = dot_coeffs_exact(model.N, m)
    J = model.J
    return float(c0) * J, float(cp) * J, float(cm) * J


def dot_generator_bands(model: DotModel, grid: SizeGrid):
    """Three bands ``(lower, diag, upper)`` of the generator on ``grid``.

    ``lower[i] = G[i, i-1]`` and ``upper[i] = G[i, i+1]``; the unused ends are
    zero.
    """
    if grid.n_fermions != model.N:
        raise DomainError("grid and model disagree on N")
    m = grid.points
    c0, cp, cm = _dot_coeffs_array(model.N, model.J, m)
    lower = cm.copy()
    upper = cp.copy()
    lower[0] = 0.0
    upper[-1] = 0.0
    diag = c0.copy()
    if grid.is_truncated:
        # close the cut: drop the escape rate m_top -> m_top + 2
        _, _, cm_out = _dot_coeffs_array(model.N, model.J, np.array([m[-1] + 2]))
        diag[-1] += cm_out[0]
    return lower, diag, upper


def build_dot_generator(model: DotModel, grid: SizeGrid) -> np.ndarray:
    """Dense generator of the dot master equation restricted to ``grid``."""
    lower, diag, upper = dot_generator_bands(model, grid)
    G = np.diag(diag)
    if len(grid) > 1:
        G += np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    return G


def build_dot_generator_exact(N: int, parity: int):
    """Exact generator (units of ``J``) on the full sector as nested lists of
    :class:`~fractions.Fraction`."""
    pts = SizeGrid(N, parity).points
    n = len(pts)
    G = [[Fraction(0)] * n for _ in range(n)]
    for i, m in enumerate(pts):
        c0, cp, cm = dot_coeffs_exact(N, int(m))
        G[i][i] = c0
        if i + 1 < n:
            G[i][i + 1] = cp
        if i > 0:
            G[i][i - 1] = cm
    return G


# ---------------------------------------------------------------------------
# chain


def chain_rates(model: ChainModel, m: np.ndarray):
    """Vectorized out-rates of lattice states.

    ``m`` has shape ``(..., L)``.  Returns ``(up, down)`` of the same shape:
    ``up[..., x]`` is the rate of ``m -> m + 2 e_x`` and ``down[..., x]`` the
    rate of ``m -> m - 2 e_x``.  Rates follow the periodic sum of bond terms
    (``3 J2 / N^3`` prefactor, ``a3`` of the raised target, ``a1`` of the
    lowered target) plus the on-site dot rates at ``J1``.
    """
    N = model.N
    m = np.asarray(m, dtype=np.int64)
    if m.shape[-1] != model.sites:
        raise DomainError(f"state has {m.shape[-1]} sites, model has {model.sites}")
    _check_m(N, m)
    mf = m.astype(float)
    a2 = _a2(N, mf)
    neigh = np.roll(a2, 1, axis=-1) + np.roll(a2, -1, axis=-1) - 2.0 * N
    bond = 3.0 * model.bond_coupling / float(N) ** 3
    up = bond * 2.0 * _a3(N, mf + 2) * neigh
    down = bond * 2.0 * _a1(N, mf - 2) * neigh
    if model.onsite_coupling > 0:
        # rate m -> m+2 is Cminus at the target, m -> m-2 is Cplus at the target
        _, _, cm_up = _dot_coeffs_array(N, model.onsite_coupling, mf + 2)
        _, cp_dn, _ = _dot_coeffs_array(N, model.onsite_coupling, mf - 2)
        up = up + cm_up
        down = down + cp_dn
    half = N // 2
    up = np.where(m + 2 > half, 0.0, up)
    down = np.where(m - 2 < -half, 0.0, down)
    return up, down


def chain_transitions(model: ChainModel, m_vec: Sequence[int], x: int) -> TransitionSet:
    """Outgoing transitions of state ``m_vec`` that change site ``x``."""
    m_vec = np.asarray(m_vec, dtype=np.int64)
    if not 0 <= x < model.sites:
        raise DomainError(f"site {x} outside chain of length {model.sites}")
    up, down = chain_rates(model, m_vec)
    e = np.zeros(model.sites, dtype=np.int64)
    e[x] = 2
    deltas, rates = [], []
    for d, r in ((e, up[x]), (-e, down[x])):
        if r != 0.0:
            deltas.append(tuple(int(v) for v in d))
            rates.append(float(r))
    return TransitionSet(tuple(deltas), tuple(rates), -float(sum(rates)))


def chain_rate_tables(model: ChainModel):
    """Per-site lookup tables indexed by ``m + N/2`` (length ``N + 1``).

    Returns ``(a2, up_bond, dn_bond, on_up, on_dn)`` such that at site ``x``

        up   = up_bond[m_x] * (a2[m_{x-1}] + a2[m_{x+1}] - 2N) + on_up[m_x]
        down = dn_bond[m_x] * (a2[m_{x-1}] + a2[m_{x+1}] - 2N) + on_dn[m_x]

    reproduce :func:`chain_rates`.  Moves leaving ``[-N/2, N/2]`` have zero
    entries.
    """
    N = model.N
    half = N // 2
    m = np.arange(-half, half + 1, dtype=float)
    bond = 3.0 * model.bond_coupling / float(N) ** 3
    a2 = _a2(N, m)
    up_bond = np.where(m + 2 > half, 0.0, 2.0 * bond * _a3(N, m + 2))
    dn_bond = np.where(m - 2 < -half, 0.0, 2.0 * bond * _a1(N, m - 2))
    on_up = np.zeros_like(m)
    on_dn = np.zeros_like(m)
    if model.onsite_coupling > 0:
        _, _, cm_up = _dot_coeffs_array(N, model.onsite_coupling, m + 2)
        _, cp_dn, _ = _dot_coeffs_array(N, model.onsite_coupling, m - 2)
        on_up = np.where(m + 2 > half, 0.0, cm_up)
        on_dn = np.where(m - 2 < -half, 0.0, cp_dn)
    return np.ascontiguousarray(np.stack([a2, up_bond, dn_bond, on_up, on_dn]))
