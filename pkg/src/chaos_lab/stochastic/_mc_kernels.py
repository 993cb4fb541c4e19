"""Compiled Monte Carlo steppers.

Kernels consume caller-supplied blocks of uniforms (or normals) and return
early when a block runs out, so the random stream stays under the control
of the per-trajectory generator.  Status codes: ``0`` finished, ``1`` needs
more random numbers, ``2`` step probability overflow.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

DONE, NEED_MORE, OVERFLOW = 0, 1, 2


# ---------------------------------------------------------------------------
# 0d birth-death


@njit(cache=True)
def dr0d_gillespie(m, t, rec, lam, cap, times, u, out):
    pos = 0
    n_rec = times.shape[0]
    while rec < n_rec:
        rb = lam * m
        rd = lam * m * (m - 1) / cap
        total = rb + rd
        if total <= 0.0:
            while rec < n_rec:
                out[rec] = m
                rec += 1
            return DONE, m, t, rec
        if pos + 2 > u.shape[0]:
            return NEED_MORE, m, t, rec
        t_next = t - math.log1p(-u[pos]) / total
        while rec < n_rec and times[rec] < t_next:
            out[rec] = m
            rec += 1
        if rec == n_rec:
            return DONE, m, t, rec
        if u[pos + 1] * total < rb:
            m += 1
        else:
            m -= 1
        t = t_next
        pos += 2
    return DONE, m, t, rec


@njit(cache=True)
def dr0d_fixed_dt(m, step, rec, lam, cap, dt, rec_steps, u, out):
    pos = 0
    n_rec = rec_steps.shape[0]
    while rec < n_rec:
        while rec < n_rec and rec_steps[rec] == step:
            out[rec] = m
            rec += 1
        if rec == n_rec:
            break
        if pos >= u.shape[0]:
            return NEED_MORE, m, step, rec
        pb = lam * m * dt
        pd = lam * m * (m - 1) / cap * dt
        if pb + pd > 1.0:
            return OVERFLOW, m, step, rec
        x = u[pos]
        pos += 1
        if x < pb:
            m += 1
        elif x < pb + pd:
            m -= 1
        step += 1
    return DONE, m, step, rec


# ---------------------------------------------------------------------------
# chain master equation


@njit(cache=True)
def _chain_site_rates(m, x, half, n, a2, up_bond, dn_bond, on_up, on_dn):
    L = m.shape[0]
    i = m[x] + half
    left = m[(x - 1) % L] + half
    right = m[(x + 1) % L] + half
    neigh = a2[left] + a2[right] - 2.0 * n
    return up_bond[i] * neigh + on_up[i], dn_bond[i] * neigh + on_dn[i]


@njit(cache=True)
def chain_fixed_dt(m, step, rec, half, n, tables, dt, max_p, rec_steps, u, out):
    a2, up_bond, dn_bond, on_up, on_dn = tables[0], tables[1], tables[2], tables[3], tables[4]
    L = m.shape[0]
    up = np.empty(L)
    dn = np.empty(L)
    pos = 0
    n_rec = rec_steps.shape[0]
    while rec < n_rec:
        while rec < n_rec and rec_steps[rec] == step:
            out[rec, :] = m
            rec += 1
        if rec == n_rec:
            break
        if pos + L > u.shape[0]:
            return NEED_MORE, step, rec
        for x in range(L):
            up[x], dn[x] = _chain_site_rates(m, x, half, n, a2, up_bond, dn_bond, on_up, on_dn)
            if (up[x] + dn[x]) * dt > max_p:
                return OVERFLOW, step, rec
        # synchronous: all sites use the rates of the state at this step
        for x in range(L):
            v = u[pos + x]
            if v < up[x] * dt:
                m[x] += 2
            elif v < (up[x] + dn[x]) * dt:
                m[x] -= 2
        pos += L
        step += 1
    return DONE, step, rec


@njit(cache=True)
def chain_gillespie(m, t, rec, half, n, tables, times, u, out):
    a2, up_bond, dn_bond, on_up, on_dn = tables[0], tables[1], tables[2], tables[3], tables[4]
    L = m.shape[0]
    rates = np.empty(2 * L)
    pos = 0
    n_rec = times.shape[0]
    while rec < n_rec:
        total = 0.0
        for x in range(L):
            a, b = _chain_site_rates(m, x, half, n, a2, up_bond, dn_bond, on_up, on_dn)
            rates[2 * x] = a
            rates[2 * x + 1] = b
            total += a + b
        if total <= 0.0:
            while rec < n_rec:
                out[rec, :] = m
                rec += 1
            return DONE, t, rec
        if pos + 2 > u.shape[0]:
            return NEED_MORE, t, rec
        t_next = t - math.log1p(-u[pos]) / total
        while rec < n_rec and times[rec] < t_next:
            out[rec, :] = m
            rec += 1
        if rec == n_rec:
            return DONE, t, rec
        target = u[pos + 1] * total
        acc = 0.0
        k = 2 * L - 1
        for j in range(2 * L):
            acc += rates[j]
            if target < acc:
                k = j
                break
        # guard against rounding landing on a zero-rate channel
        while rates[k] == 0.0:
            k -= 1
        if k % 2 == 0:
            m[k // 2] += 2
        else:
            m[k // 2] -= 2
        t = t_next
        pos += 2
    return DONE, t, rec


# ---------------------------------------------------------------------------
# Euler-Maruyama


@njit(cache=True)
def em_dot(x, step, rec, inv_n, noisy, dt, rec_steps, z, out):
    """Euler-Maruyama for
    ``dX = -[2X(1-X^2) + (6/N) X(X^2-1)] dt + sqrt((4/N)(1-X^4)) dB``."""
    lim = 1.0 - 1e-9
    sq = math.sqrt(dt)
    pos = 0
    n_rec = rec_steps.shape[0]
    while rec < n_rec:
        while rec < n_rec and rec_steps[rec] == step:
            out[rec] = x
            rec += 1
        if rec == n_rec:
            break
        x2 = x * x
        drift = -(2.0 * x * (1.0 - x2) + 6.0 * inv_n * x * (x2 - 1.0))
        if noisy:
            if pos >= z.shape[0]:
                return NEED_MORE, x, step, rec
            sig = math.sqrt(max(4.0 * inv_n * (1.0 - x2 * x2), 0.0))
            x = x + drift * dt + sig * sq * z[pos]
            pos += 1
        else:
            x = x + drift * dt
        if x > lim:
            x = lim
        elif x < -lim:
            x = -lim
        step += 1
    return DONE, x, step, rec
