"""Closed-form and semi-analytic solutions."""
from .finite_n import (XiEpsState, otoc_finite_n_integral, otoc_finite_n_prediction,
                       size_dist_finite_n, xi_eps_finite_n, xi_eps_rhs, xi_finite_n_approx)
from .fitting import WINDOWS, fit_lyapunov_correction, relative_deviation
from .large_n import (LargeNJob, flux_large_n, flux_peak_time, lyapunov_exponent,
                      otoc_large_n, scrambling_parameter, size_dist_large_n, size_dist_peak,
                      small_dist_large_n, xi_large_n)
from .special import tricomi_u
from .spectrum import (S_MAX_DOUBLE, BidiagonalSpectrum, bidiagonal_spectrum, rates_finite_n,
                       rates_large_n)

__all__ = [
    "LargeNJob", "lyapunov_exponent", "scrambling_parameter", "xi_large_n",
    "small_dist_large_n", "flux_large_n", "flux_peak_time", "otoc_large_n",
    "size_dist_large_n", "size_dist_peak", "tricomi_u", "BidiagonalSpectrum",
    "bidiagonal_spectrum", "rates_large_n", "rates_finite_n", "S_MAX_DOUBLE",
    "XiEpsState", "xi_eps_rhs", "xi_eps_finite_n", "xi_finite_n_approx",
    "otoc_finite_n_prediction", "otoc_finite_n_integral", "size_dist_finite_n",
    "WINDOWS", "fit_lyapunov_correction", "relative_deviation",
]
