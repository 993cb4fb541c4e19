"""Independent construction of the generators from spin ladder rules.

States are sparse dictionaries ``{m: Fraction}`` (one dot) or
``{(m_0, ..., m_{L-1}): Fraction}`` (chain).  The spin operators act on the
basis ``|m)`` by

    L_x |m) = (f_+(m) |m+1) + f_-(m) |m-1)) / 2
    L_z |m) = m |m)

and ``L_y^2 = -D^2``, ``L_y^4 = D^4`` with
``D |m) = (f_+(m) |m+1) - f_-(m) |m-1)) / 2``.  Vectors falling outside
``[-N/2, N/2]`` are dropped.  Nothing here shares code with the closed-form
coefficients in :mod:`chaos_lab.model`, which is the point: the two paths
must agree.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

from .model import ChainModel, DotModel, SizeGrid, build_dot_generator_exact

__all__ = [
    "dot_liouvillian_exact",
    "build_dot_generator_from_algebra",
    "chain_generator_from_algebra",
    "exact_generators_agree",
]

_HALF = Fraction(1, 2)


def _add(out, key, val):
    if val:
        out[key] = out.get(key, 0) + val


def _ladder(N, vec, sign):
    half = N // 2
    out = {}
    for m, c in vec.items():
        if m + 1 <= half:
            _add(out, m + 1, c * _HALF * (m + half + 1))
        if m - 1 >= -half:
            _add(out, m - 1, sign * c * _HALF * (half - m + 1))
    return out


def _lx(N, v):
    return _ladder(N, v, 1)


def _d(N, v):
    return _ladder(N, v, -1)


def _lz(N, v):
    return {m: m * c for m, c in v.items() if m}


def _power(op, N, v, k):
    for _ in range(k):
        v = op(N, v)
    return v


def _combine(*terms):
    out = {}
    for coef, vec in terms:
        for k, c in vec.items():
            _add(out, k, coef * c)
    return out


def _casimir_like(N, l2, l4, v):
    """``32 L^4 + 8(8 - 6N) L^2 + 6N(N-2)`` applied to ``v``."""
    return _combine((32, l4), (8 * (8 - 6 * N), l2), (6 * N * (N - 2), v))


def _apply_liouvillian(N, v):
    x2 = _power(_lx, N, v, 2)
    x4 = _power(_lx, N, x2, 2)
    d2 = _power(_d, N, v, 2)
    y2 = {k: -c for k, c in d2.items()}
    y4 = _power(_d, N, d2, 2)
    z2 = _power(_lz, N, v, 2)
    z4 = _power(_lz, N, z2, 2)
    lx = _casimir_like(N, x2, x4, v)
    ly = _casimir_like(N, y2, y4, v)
    lz = _casimir_like(N, z2, z4, v)
    inner = _combine((-2 * comb(N, 4), v), (Fraction(1, 24), lx), (Fraction(1, 24), lz),
                     (Fraction(-1, 24), ly))
    pref = Fraction(6, N ** 3)
    return {k: pref * c for k, c in inner.items()}


def dot_liouvillian_exact(N: int, parity: int):
    """Generator (units of ``J``) on the full parity sector, as Fractions.

    Row ``m`` of the result holds the expansion of ``L |m)``; since the
    master equation evolves ``P`` with the transpose of that action, this
    is already in the ``G[target, source]`` layout.
    """
    pts = [int(p) for p in SizeGrid(N, parity).points]
    index = {m: i for i, m in enumerate(pts)}
    n = len(pts)
    G = [[Fraction(0)] * n for _ in range(n)]
    for i, m in enumerate(pts):
        for k, c in _apply_liouvillian(N, {m: Fraction(1)}).items():
            if k in index:
                G[i][index[k]] += c
            elif c:
                raise AssertionError(f"ladder action left parity sector at m={k}")
    return G


def build_dot_generator_from_algebra(model: DotModel, grid: SizeGrid) -> np.ndarray:
    """Float generator rebuilt from the ladder rules, restricted to ``grid``.

    Truncated grids are closed the same way as in
    :func:`chaos_lab.model.build_dot_generator` (escape rate removed from the
    diagonal).
    """
    full = dot_liouvillian_exact(model.N, grid.parity)
    n = len(grid)
    G = np.array([[float(c) for c in row[:n]] for row in full[:n]]) * model.J
    if n < len(full):
        G[n - 1, n - 1] += float(full[n][n - 1]) * model.J
    return G


def exact_generators_agree(N: int) -> bool:
    """Exact rational comparison of both constructions for both parities."""
    return all(dot_liouvillian_exact(N, p) == build_dot_generator_exact(N, p) for p in (0, 1))


# ---------------------------------------------------------------------------
# chain


def _site_op(op, N, vec, x):
    """Apply single-site operator ``op`` at site ``x`` of a tensor-basis vector."""
    out = {}
    for key, c in vec.items():
        for m, d in op(N, {key[x]: c}).items():
            _add(out, key[:x] + (m,) + key[x + 1:], d)
    return out


def _shifted_square(N, vec, x, which):
    """``(4 L_alpha^2 - N)`` at site ``x``."""
    if which == "x":
        sq = _site_op(_lx, N, _site_op(_lx, N, vec, x), x)
    elif which == "y":
        d2 = _site_op(_d, N, _site_op(_d, N, vec, x), x)
        sq = {k: -c for k, c in d2.items()}
    else:
        sq = _site_op(_lz, N, _site_op(_lz, N, vec, x), x)
    return _combine((4, sq), (-N, vec))


def _apply_chain(model: ChainModel, state):
    N, L = model.N, model.sites
    v = {state: Fraction(1)}
    terms = []
    j2 = Fraction(model.bond_coupling).limit_denominator(10 ** 9)
    j1 = Fraction(model.onsite_coupling).limit_denominator(10 ** 9)
    if j2:
        bond_const = (N * N - N) ** 2
        for x in range(L):
            y = (x + 1) % L
            for which, sign in (("x", 1), ("y", -1), ("z", 1)):
                w = _shifted_square(N, _shifted_square(N, v, y, which), x, which)
                terms.append((sign * 3 * j2 / N ** 3, w))
            terms.append((-3 * j2 * bond_const / Fraction(N ** 3), v))
    if j1:
        for x in range(L):
            for key, c in v.items():
                w = {key[:x] + (k,) + key[x + 1:]: d for k, d in _apply_liouvillian(N, {key[x]: c}).items()}
                terms.append((j1, w))
    return _combine(*terms)


def chain_generator_from_algebra(model: ChainModel, states):
    """Exact chain generator on the listed states as a dict of dicts.

    ``states`` is an iterable of size tuples closed under the dynamics (for
    example every combination of one parity sector per site).  Returns
    ``G[target][source]`` as Fractions.
    """
    states = [tuple(int(v) for v in s) for s in states]
    known = set(states)
    G = {s: {} for s in states}
    for s in states:
        for k, c in _apply_chain(model, s).items():
            if k not in known:
                raise AssertionError(f"state {k} reached from {s} is not in the state list")
            G[s][k] = c
    return G
