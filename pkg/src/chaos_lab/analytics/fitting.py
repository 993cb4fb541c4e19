"""Extraction of the 1/N Lyapunov-correction coefficients.

If the finite-N curve is the large-N curve at a slowed clock,
``F_N(t) = F((1 - c/N) t)``, then to first order in 1/N

    dF/F = (F_N - F)/F = c * X(t),   X(t) = -(t/N) d ln|F|/dt.

In the early (Lyapunov) window this is the ``A`` coefficient, in the late
(quasi-normal decay) window the ``B`` coefficient.
"""
from __future__ import annotations

import numpy as np

from ..errors import FitError
from ..evolver import TimeSeries

__all__ = ["WINDOWS", "fit_lyapunov_correction", "relative_deviation"]

WINDOWS = {"early": (0.85, 0.99), "late": (0.01, 0.15)}
_DELTA = 0.25


def relative_deviation(exact: TimeSeries, reference: TimeSeries) -> np.ndarray:
    if exact.times.shape != reference.times.shape or not np.allclose(exact.times, reference.times,
                                                                     rtol=0, atol=1e-12):
        raise FitError("exact and reference must share one time grid")
    return (exact.values - reference.values) / reference.values


def fit_lyapunov_correction(exact: TimeSeries, reference: TimeSeries, N: int,
                            lambda_L: float, window: str, form: str = "rescaling"):
    """Least-squares coefficient of the relative deviation in a window.

    Parameters
    ----------
    exact, reference
        Finite-N and large-N curves on one time grid.
    N
        System size.
    lambda_L
        Large-N Lyapunov exponent; used by ``form='literal'``.
    window
        ``'early'`` keeps ``|F_ref|`` in ``[0.85, 0.99]``, ``'late'`` keeps
        ``[0.01, 0.15]``.
    form
        ``'rescaling'`` (default) regresses on ``X(t) = -(t/N) d ln|F|/dt``
        with an intercept.  ``'literal'`` regresses on
        ``t e^(lambda_L t)/N^2`` (early, sign flipped) or
        ``2 Delta lambda_L t/N`` with ``Delta = 1/4`` (late).

    Returns
    -------
    float
        ``A`` for the early window, ``B`` for the late window.
    """
    if window not in WINDOWS:
        raise FitError(f"window must be one of {sorted(WINDOWS)}, got {window!r}")
    if form not in ("rescaling", "literal"):
        raise FitError(f"unknown form {form!r}")
    dev = relative_deviation(exact, reference)
    t = reference.times
    mag = np.abs(reference.values)
    lo, hi = WINDOWS[window]
    mask = (mag >= lo) & (mag <= hi)
    if mask.sum() < 3:
        raise FitError(f"{window} window |F| in [{lo}, {hi}] holds {int(mask.sum())} samples")
    if form == "rescaling":
        dlog = np.gradient(np.log(mag), t)
        x = -(t / N) * dlog
    elif window == "early":
        x = -t * np.exp(lambda_L * t) / N ** 2
    else:
        x = 2.0 * _DELTA * lambda_L * t / N
    x, y = x[mask], dev[mask]
    if np.ptp(x) == 0:
        raise FitError("regressor is constant over the window")
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])
