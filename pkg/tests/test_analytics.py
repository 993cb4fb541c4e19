import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from chaos_lab.analytics import (LargeNJob, bidiagonal_spectrum, fit_lyapunov_correction,
                                 flux_large_n, flux_peak_time, lyapunov_exponent, otoc_large_n,
                                 otoc_finite_n_integral, otoc_finite_n_prediction,
                                 rates_finite_n, rates_large_n, relative_deviation,
                                 scrambling_parameter, size_dist_finite_n, size_dist_large_n,
                                 size_dist_peak, small_dist_large_n, tricomi_u, xi_eps_finite_n,
                                 xi_eps_rhs, xi_finite_n_approx, xi_large_n)
from chaos_lab.errors import DegeneracyError, DomainError, FitError
from chaos_lab.evolver import TimeSeries

# ---------------------------------------------------------------------------
# Tricomi U


@pytest.mark.parametrize("a,b,z", [(0.5, 1.0, 0.1), (0.5, 1.0, 30.0), (1.0, 1.0, 2.0),
                                   (1.0, 1.5, 0.01), (1.5, 0.5, 5.0), (3.0, 2.0, 200.0)])
def test_tricomi_matches_scipy(a, b, z):
    assert tricomi_u(a, b, z) == pytest.approx(special.hyperu(a, b, z), rel=1e-8)


def test_tricomi_closed_cases():
    # U(a, a+1, z) = z^-a
    for a, z in ((0.5, 3.0), (2.0, 0.7)):
        assert tricomi_u(a, a + 1.0, z) == pytest.approx(z ** -a, rel=1e-10)
    # large-z asymptote U ~ z^-a
    assert tricomi_u(0.5, 1.0, 1e6) * 1e3 == pytest.approx(1.0, rel=1e-6)


def test_tricomi_domain():
    with pytest.raises(DomainError):
        tricomi_u(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        tricomi_u(1.0, 1.0, -1.0)
    with pytest.raises(DomainError):
        tricomi_u(1.0, float("nan"), 1.0)


# ---------------------------------------------------------------------------
# large N


def test_job_validation_and_defaults():
    assert LargeNJob(10 ** 4, 0.5).s_star == 100.0
    assert LargeNJob(10 ** 6, 0.5).s_star == 10 ** 4
    assert LargeNJob(200, 0.5).s_star == 20.0
    with pytest.raises(DomainError):
        LargeNJob(1001, 0.5)
    with pytest.raises(DomainError):
        LargeNJob(1000, 0.5, r=3, s_star=2)
    with pytest.raises(DomainError):
        LargeNJob(1000, 0.5, s_star=200)
    assert lyapunov_exponent(0.5) == 4.0 and LargeNJob(1000, 0.25).lyapunov == 2.0


def test_xi_trajectory_values():
    job = LargeNJob(1000, 0.5, s_star=100)
    assert xi_large_n(0.0, LargeNJob(400, 0.5, s_star=40)) == pytest.approx(
        -1 / math.sqrt(1 + 0.4))
    assert xi_large_n(50.0, job) == pytest.approx(0.0, abs=1e-20)
    assert xi_large_n(1e4, job) <= 0.0
    t = np.linspace(0, 3, 50)
    assert np.all(np.diff(xi_large_n(t, job)) > 0)


def test_xi_trajectory_solves_flow():
    job = LargeNJob(1000, 0.7, s_star=50)
    x0 = xi_large_n(0.0, job)
    sol = integrate.solve_ivp(lambda t, x: 4 * job.J * x * (x * x - 1), (0, 2), [x0],
                              t_eval=[0.5, 1.0, 2.0], rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(sol.y[0], xi_large_n(sol.t, job), atol=1e-9)


@given(st.sampled_from([1, 2, 3]), st.floats(0.01, 1.0))
def test_small_distribution_is_normalized(r, t):
    total = sum(small_dist_large_n(r, s, t, 0.5) for s in range(r, 6000, 2))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_small_distribution_solves_recursion():
    # dP(s)/dt = 4J [(s-2) P(s-2) - s P(s)]
    J, r = 0.5, 3
    sizes = np.arange(r, 80, 2)

    def rhs(_t, p):
        d = -4 * J * sizes * p
        d[1:] += 4 * J * sizes[:-1] * p[:-1]
        return d

    p0 = np.zeros(sizes.size)
    p0[0] = 1.0
    sol = integrate.solve_ivp(rhs, (0, 0.8), p0, method="DOP853", rtol=1e-12, atol=1e-15)
    ref = [small_dist_large_n(r, int(s), 0.8, J) for s in sizes[:8]]
    np.testing.assert_allclose(sol.y[:8, -1], ref, atol=1e-10)
    assert small_dist_large_n(3, 1, 0.5, J) == 0.0
    with pytest.raises(DomainError):
        small_dist_large_n(1, 2, 0.5, J)


@pytest.mark.parametrize("r", [1, 2, 4])
def test_flux_normalized_and_peaked(r):
    job = LargeNJob(10 ** 5, 0.5, r=r, s_star=400)
    tp = flux_peak_time(job)
    val, _ = integrate.quad(lambda t: flux_large_n(t, job), tp - 10, tp + 30, limit=200)
    assert val == pytest.approx(1.0, abs=1e-8)
    eps = 1e-4
    assert flux_large_n(tp, job) > flux_large_n(tp - eps, job)
    assert flux_large_n(tp, job) > flux_large_n(tp + eps, job)


def test_otoc_closed_form_limits():
    job = LargeNJob(10 ** 4, 0.5)
    assert otoc_large_n(0.0, job) == pytest.approx(-1.0, abs=1e-3)
    assert abs(otoc_large_n(8.0, job)) < 1e-3
    two = LargeNJob(10 ** 4, 0.5, r=2, n=2)
    # r = n gives a^(r/2) U(r/2, 1, a)
    a = scrambling_parameter(1.0, 10 ** 4, 0.5)
    assert otoc_large_n(1.0, two) == pytest.approx(a * special.hyperu(1, 1, a), rel=1e-8)


@pytest.mark.parametrize("r,n", [(1, 1), (1, 2), (2, 2)])
def test_otoc_closed_equals_flux_integral(r, n):
    job = LargeNJob(10 ** 5, 0.5, r, n, s_star=400)
    t = np.array([1.5, 2.5, 3.5])
    np.testing.assert_allclose(otoc_large_n(t, job, "integral"), otoc_large_n(t, job), atol=2e-6)
    with pytest.raises(DomainError):
        otoc_large_n(t, job, "series")


@pytest.mark.parametrize("r", [1, 2, 3])
def test_size_density_normalized_and_matches_moment(r):
    job = LargeNJob(10 ** 4, 0.5, r, 1)
    t = 2.0
    mass, _ = integrate.quad(lambda x: size_dist_large_n(x, t, job), -1, 0, limit=200)
    first, _ = integrate.quad(lambda x: x * size_dist_large_n(x, t, job), -1, 0, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-7)
    assert first == pytest.approx(otoc_large_n(t, job), rel=1e-6)
    assert size_dist_large_n(0.5, t, job) == 0.0


def test_size_density_peak():
    job = LargeNJob(10 ** 4, 0.5, 2, 1)
    t = 2.3
    xp = size_dist_peak(t, job)
    h = 1e-5
    d = [size_dist_large_n(x, t, job) for x in (xp - h, xp, xp + h)]
    assert d[1] > d[0] and d[1] > d[2]
    assert math.isnan(size_dist_peak(0.0, LargeNJob(10 ** 4, 0.5, 1, 1)))
    xp1 = size_dist_peak(2.5, LargeNJob(10 ** 4, 0.5, 1, 1))
    d1 = [size_dist_large_n(x, 2.5, LargeNJob(10 ** 4, 0.5, 1, 1)) for x in (xp1 - h, xp1, xp1 + h)]
    assert d1[1] > d1[0] and d1[1] > d1[2]


# ---------------------------------------------------------------------------
# spectrum


def test_spectrum_eigenpairs():
    sp = bidiagonal_spectrum(rates_large_n, 21, 1)
    G = sp.generator().astype(float)
    np.testing.assert_array_equal(sp.eigenvalues, -rates_large_n(sp.sizes))
    for i, lam in enumerate(sp.eigenvalues):
        v = sp.right[i].astype(float)
        w = sp.left[i].astype(float)
        np.testing.assert_allclose(G @ v, lam * v, atol=1e-6 * np.abs(v).max())
        np.testing.assert_allclose(w @ G, lam * w, atol=1e-6 * np.abs(w).max())


@pytest.mark.parametrize("rates", [rates_large_n, lambda s: rates_finite_n(s, 1000)])
def test_spectrum_biorthogonal_and_reconstructs(rates):
    sp = bidiagonal_spectrum(rates, 41, 1)
    assert sp.biorthogonality_error() < 1e-8
    p = sp.reconstruct(1, 0.7)
    if rates is rates_large_n:
        ref = [small_dist_large_n(1, int(s), 0.7 / 2, 1.0) for s in sp.sizes]
        np.testing.assert_allclose(p, ref, atol=1e-7)
    assert p.min() > -1e-7


def test_spectrum_guards():
    with pytest.raises(DomainError):
        bidiagonal_spectrum(rates_large_n, 43, 1)
    with pytest.raises(DomainError):
        bidiagonal_spectrum(rates_large_n, 40, 1)
    with pytest.raises(DomainError):
        bidiagonal_spectrum(lambda s: rates_finite_n(s, 60), 21, 1, N=60)
    with pytest.raises(DegeneracyError):
        bidiagonal_spectrum([1.0, 1.0, 2.0], 5, 1)
    with pytest.raises(DomainError):
        bidiagonal_spectrum([1.0, 2.0], 5, 1)
    with pytest.raises(DomainError):
        rates_finite_n(-1, 100)
    assert bidiagonal_spectrum([2.0, 6.0, 10.0], 5, 1).index(3) == 1


# ---------------------------------------------------------------------------
# 1/N


def test_xi_eps_fixed_point_and_limit():
    N = 500
    rhs = xi_eps_rhs(N)
    np.testing.assert_allclose(rhs(0, [0.0, 1.0 / N]), [0.0, 0.0], atol=1e-15)
    states = xi_eps_finite_n([0.0, 40.0], N, 10)
    assert states[0].xi == pytest.approx(2 * 10 / N - 1) and states[0].eps == 0.0
    assert states[-1].xi == pytest.approx(0.0, abs=1e-6)
    assert states[-1].eps == pytest.approx(1.0 / N, rel=1e-5)
    job = LargeNJob(N, 0.5, s_star=10)
    plain = xi_eps_finite_n([0.0, 1.0], N, 10, corrections=False, xi0=xi_large_n(0.0, job))
    assert plain[-1].xi == pytest.approx(xi_large_n(1.0, job), abs=1e-8)
    with pytest.raises(DomainError):
        xi_eps_finite_n([1.0, 0.5], N, 10)


def test_xi_closed_approximation_tracks_integration():
    N, s = 10 ** 4, 100
    t = np.linspace(1.0, 3.0, 9)
    num = np.array([st_.xi for st_ in xi_eps_finite_n(t, N, s)])
    np.testing.assert_allclose(xi_finite_n_approx(t, N, s), num, rtol=0.02)


def test_finite_n_otoc_forms_agree():
    job = LargeNJob(10 ** 5, 0.5)
    t = np.array([2.0, 3.0, 4.0])
    a = otoc_finite_n_prediction(t, job)
    b = otoc_finite_n_integral(t, job)
    np.testing.assert_allclose(a, b, atol=1e-4)
    with pytest.raises(DomainError):
        otoc_finite_n_prediction(t, LargeNJob(10 ** 5, 0.5, 1, 2))


def test_finite_n_density_is_normalized_and_close_to_large_n():
    job = LargeNJob(1000, 0.5)
    t = 1.2
    xi = np.linspace(-1.1, 0.1, 1201)
    d = size_dist_finite_n(xi, t, job)
    assert integrate.trapezoid(d, xi) == pytest.approx(1.0, abs=2e-3)
    assert d.min() >= 0.0


# ---------------------------------------------------------------------------
# fitting


def _synthetic(N, c):
    job = LargeNJob(N, 0.5)
    t = np.linspace(0.05, 7.0, 1400)
    ref = TimeSeries(t, otoc_large_n(t, job))
    ex = TimeSeries(t, otoc_large_n(t * (1 - c / N), job))
    return ex, ref


@pytest.mark.parametrize("window", ["early", "late"])
def test_fit_recovers_rescaling(window):
    ex, ref = _synthetic(10 ** 5, 6.0)
    assert fit_lyapunov_correction(ex, ref, 10 ** 5, 4.0, window) == pytest.approx(6.0, abs=0.05)


def test_fit_errors():
    ex, ref = _synthetic(10 ** 4, 6.0)
    with pytest.raises(FitError):
        fit_lyapunov_correction(ex, ref, 10 ** 4, 4.0, "middle")
    with pytest.raises(FitError):
        fit_lyapunov_correction(ex, ref, 10 ** 4, 4.0, "early", form="cubic")
    short = TimeSeries(ref.times[:5], ref.values[:5])
    with pytest.raises(FitError):
        fit_lyapunov_correction(short, short, 10 ** 4, 4.0, "late")
    with pytest.raises(FitError):
        relative_deviation(short, ref)
    lit = fit_lyapunov_correction(ex, ref, 10 ** 4, 4.0, "late", form="literal")
    assert np.isfinite(lit)


def test_variance_relaxes_to_inverse_n():
    N, s_star = 10 ** 4, 400
    t = np.linspace(0.0, 8.0, 801)
    states = xi_eps_finite_n(t, N, s_star)
    xi = np.array([s.xi for s in states])
    epsn = np.array([s.eps for s in states]) * N
    late = xi > -0.05
    assert np.all(np.abs(epsn[late] - 1.0) <= 0.1)
    assert epsn[-1] == pytest.approx(1.0, abs=1e-3)


def test_prediction_reduces_to_large_n():
    job = LargeNJob(10 ** 12, 0.5, s_star=10 ** 6)
    t = np.array([5.0, 6.0, 7.0])
    np.testing.assert_allclose(otoc_finite_n_prediction(t, job), otoc_large_n(t, job), rtol=1e-9)
