"""Compiled inner loops.  Everything here works on plain arrays."""
from __future__ import annotations

import numpy as np
from numba import njit

# entries below this are flushed to zero so the active window can stay tight
# and the loops never touch subnormal numbers
_FLUSH = 1e-280


@njit(cache=True)
def _apply(lower, diag, upper, p, out, lo, hi):
    n = p.shape[0]
    for i in range(lo, hi):
        v = diag[i] * p[i]
        if i > 0:
            v += lower[i] * p[i - 1]
        if i + 1 < n:
            v += upper[i] * p[i + 1]
        out[i] = v


@njit(cache=True)
def _window(p, lo, hi):
    """Shrink ``[lo, hi)`` to the non-negligible entries of ``p``."""
    while lo < hi and abs(p[lo]) < _FLUSH:
        p[lo] = 0.0
        lo += 1
    while hi > lo and abs(p[hi - 1]) < _FLUSH:
        p[hi - 1] = 0.0
        hi -= 1
    return lo, hi


@njit(cache=True)
def rk4_tridiag(lower, diag, upper, p0, dt, n_steps, stride):
    """Classical RK4 for ``dp/dt = G p`` with tridiagonal ``G``.

    Returns snapshots of ``p`` every ``stride`` steps (the initial state
    included) and the final state.  Work is restricted to the window of
    non-negligible entries, widened by the stencil reach of one step.
    """
    n = p0.shape[0]
    n_rec = n_steps // stride + 1
    snaps = np.zeros((n_rec, n))
    p = p0.copy()
    k1 = np.zeros(n)
    k2 = np.zeros(n)
    k3 = np.zeros(n)
    k4 = np.zeros(n)
    tmp = np.zeros(n)
    snaps[0, :] = p
    lo, hi = _window(p, 0, n)
    rec = 1
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for step in range(1, n_steps + 1):
        a = max(lo - 4, 0)
        b = min(hi + 4, n)
        _apply(lower, diag, upper, p, k1, a, b)
        for i in range(a, b):
            tmp[i] = p[i] + h2 * k1[i]
        _apply(lower, diag, upper, tmp, k2, a, b)
        for i in range(a, b):
            tmp[i] = p[i] + h2 * k2[i]
        _apply(lower, diag, upper, tmp, k3, a, b)
        for i in range(a, b):
            tmp[i] = p[i] + dt * k3[i]
        _apply(lower, diag, upper, tmp, k4, a, b)
        for i in range(a, b):
            p[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        lo, hi = _window(p, a, b)
        if step % stride == 0:
            snaps[rec, :] = p
            rec += 1
    return snaps, p


@njit(cache=True)
def rk4_tridiag_moments(lower, diag, upper, p0, dt, n_steps, stride, xi, n_orders):
    """Like :func:`rk4_tridiag` but records ``sum_i xi_i^k p_i`` for
    ``k = 0..n_orders`` instead of full snapshots (memory O(n))."""
    n = p0.shape[0]
    n_rec = n_steps // stride + 1
    mom = np.zeros((n_rec, n_orders + 1))
    p = p0.copy()
    k1 = np.zeros(n)
    k2 = np.zeros(n)
    k3 = np.zeros(n)
    k4 = np.zeros(n)
    tmp = np.zeros(n)
    lo, hi = _window(p, 0, n)
    _moments(p, xi, lo, hi, mom, 0)
    rec = 1
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for step in range(1, n_steps + 1):
        a = max(lo - 4, 0)
        b = min(hi + 4, n)
        _apply(lower, diag, upper, p, k1, a, b)
        for i in range(a, b):
            tmp[i] = p[i] + h2 * k1[i]
        _apply(lower, diag, upper, tmp, k2, a, b)
        for i in range(a, b):
            tmp[i] = p[i] + h2 * k2[i]
        _apply(lower, diag, upper, tmp, k3, a, b)
        for i in range(a, b):
            tmp[i] = p[i] + dt * k3[i]
        _apply(lower, diag, upper, tmp, k4, a, b)
        for i in range(a, b):
            p[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        lo, hi = _window(p, a, b)
        if step % stride == 0:
            _moments(p, xi, lo, hi, mom, rec)
            rec += 1
    return mom, p


@njit(cache=True)
def _moments(p, xi, lo, hi, mom, row):
    k_max = mom.shape[1]
    for i in range(lo, hi):
        w = p[i]
        for k in range(k_max):
            mom[row, k] += w
            w *= xi[i]
