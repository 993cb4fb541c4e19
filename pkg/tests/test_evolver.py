import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from chaos_lab.errors import ConfigurationError, DomainError
from chaos_lab.evolver import (EvolveConfig, TimeSeries, chain_state_space, evolve_chain_exact,
                               evolve_dot, generating_function, otoc_curve, otoc_curves,
                               otoc_moment)
from chaos_lab.model import (ChainModel, DotModel, SizeDistribution, SizeGrid,
                             build_dot_generator)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        EvolveConfig(-1.0)
    with pytest.raises(ConfigurationError):
        EvolveConfig(1.0, dt=0.0)
    with pytest.raises(ConfigurationError):
        EvolveConfig(1.0, method="euler")
    with pytest.raises(ConfigurationError):
        EvolveConfig(1.0, record_stride=0)
    with pytest.raises(ConfigurationError):
        EvolveConfig(1.0, dt=1.0).resolve_dt(100.0)
    n, dt = EvolveConfig(1.0, dt=0.3, method="expm").steps(1.0)
    assert n == 4 and dt == pytest.approx(0.25)


def test_time_series():
    ts = TimeSeries([0, 1, 2], [0, 2, 4])
    assert ts.at(1.5) == 3.0 and len(ts) == 3
    with pytest.raises(DomainError):
        TimeSeries([0, 0], [1, 2])
    with pytest.raises(DomainError):
        TimeSeries([0, 1], [1, 2, 3])


@pytest.mark.parametrize("N,parity", [(12, 1), (30, 0), (64, 1)])
def test_rk4_matches_matrix_exponential(N, parity):
    model = DotModel(N, 0.8)
    grid = SizeGrid(N, parity)
    init = SizeDistribution.delta(grid, parity + 2)
    out = evolve_dot(model, init, EvolveConfig(0.7, record_stride=7))
    G = build_dot_generator(model, grid)
    for t, d in out:
        ref = scipy.linalg.expm(G * t) @ init.probs
        np.testing.assert_allclose(d.probs, ref, atol=1e-9)
    assert out[-1][0] == pytest.approx(0.7)


def test_expm_method_and_final_record():
    model = DotModel(20, 1.0)
    init = SizeDistribution.delta(SizeGrid(20, 1), 1)
    a = evolve_dot(model, init, EvolveConfig(0.5, method="rk4", record_stride=10 ** 9))
    b = evolve_dot(model, init, EvolveConfig(0.5, dt=0.25, method="expm"))
    assert [t for t, _ in a] == [0.0, pytest.approx(0.5)]
    np.testing.assert_allclose(a[-1][1].probs, b[-1][1].probs, atol=1e-10)


@given(st.integers(3, 30).map(lambda k: 2 * k), st.floats(0.0, 2.0))
def test_probability_conserved_and_positive(N, t):
    model = DotModel(N, 1.0)
    init = SizeDistribution.delta(SizeGrid(N, 1), 1)
    d = evolve_dot(model, init, EvolveConfig(t, record_stride=10 ** 9))[-1][1]
    assert abs(d.probs.sum() - 1.0) < 1e-12
    assert d.probs.min() >= -1e-12


def test_identity_operator_is_frozen():
    model = DotModel(16, 1.0)
    init = SizeDistribution.delta(SizeGrid(16, 0), 0)
    d = evolve_dot(model, init, EvolveConfig(1.0, record_stride=1000))[-1][1]
    assert d.probs[0] == 1.0


def test_late_time_distribution_is_binomial():
    # the scrambled state weights size s by C(N, s) within its parity sector
    from scipy.special import comb
    N = 20
    grid = SizeGrid(N, 1)
    init = SizeDistribution.delta(grid, 1)
    d = evolve_dot(DotModel(N, 1.0), init, EvolveConfig(15.0, record_stride=10 ** 9))[-1][1]
    w = comb(N, grid.sizes)
    np.testing.assert_allclose(d.probs, w / w.sum(), atol=1e-8)


def test_moments_and_generating_function():
    grid = SizeGrid(10, 0)
    d = SizeDistribution(grid, [0, 1, 0, 1, 0, 0])
    xi = grid.xi[[1, 3]]
    assert otoc_moment(d, 1) == pytest.approx(xi.mean())
    assert otoc_moment(d, 0) == pytest.approx(1.0)
    assert generating_function(d, 0.0) == pytest.approx(1.0)
    assert generating_function(d, 3.0) == pytest.approx(np.exp(-3 * xi).mean())
    with pytest.raises(DomainError):
        generating_function(d, 701.0)
    with pytest.raises(DomainError):
        otoc_moment(d, -1)


def test_otoc_curve_matches_distribution_moments():
    model = DotModel(40, 1.0)
    cfg = EvolveConfig(0.6, record_stride=5)
    curves = otoc_curves(model, 1, [1, 2], cfg)
    snaps = evolve_dot(model, SizeDistribution.delta(SizeGrid(40, 1), 1), cfg)
    for n in (1, 2):
        ref = [otoc_moment(d, n) for _, d in snaps]
        np.testing.assert_allclose(curves[n].values, ref, atol=1e-13)
    assert curves[1].values[0] == pytest.approx(2 * (1 - 20) / 40)
    assert otoc_curve(model, 1, 1, cfg).values[-1] == curves[1].values[-1]


def test_otoc_larger_source_scrambles_faster():
    model = DotModel(200, 0.5)
    cfg = EvolveConfig(1.0, record_stride=50)
    f1 = otoc_curve(model, 1, 2, cfg).values
    f2 = otoc_curve(model, 2, 2, cfg).values
    assert np.all(f2[1:] < f1[1:])


def test_otoc_on_truncated_grid_agrees_early():
    model = DotModel(2000, 0.5)
    cfg = EvolveConfig(2.0, record_stride=200)
    full = otoc_curve(model, 1, 1, cfg).values
    cut = otoc_curve(model, 1, 1, cfg, grid=SizeGrid.truncated(2000, 1, 0.2)).values
    np.testing.assert_allclose(cut, full, atol=1e-10)


def test_otoc_argument_checks():
    model = DotModel(10)
    with pytest.raises(DomainError):
        otoc_curve(model, 0, 1, EvolveConfig(0.1))
    with pytest.raises(DomainError):
        otoc_curves(model, 1, [], EvolveConfig(0.1))


# ---------------------------------------------------------------------------
# chain


def test_chain_state_space():
    model = ChainModel(2, 4, 1.0, 1.0)
    states = chain_state_space(model, [-1, -2])
    assert states.shape == (2 * 3, 2)
    with pytest.raises(DomainError):
        chain_state_space(model, [-1, -2, -2])
    with pytest.raises(DomainError):
        chain_state_space(model, [-3, -2])


def test_chain_methods_agree_and_conserve():
    model = ChainModel(3, 6, 1.0, 1.0)
    init = [-2, -3, -3]
    a = evolve_chain_exact(model, init, EvolveConfig(0.4, dt=0.1, method="expm"))
    b = evolve_chain_exact(model, init, EvolveConfig(0.4, dt=1e-3, method="rk4", record_stride=100))
    np.testing.assert_allclose(a.probs, b.probs, atol=1e-10)
    np.testing.assert_allclose(a.probs.sum(axis=1), 1.0, atol=1e-12)
    vals, marg = a.marginal(0)
    np.testing.assert_allclose(marg.sum(axis=1), 1.0)
    assert a.mean_xi().shape == (a.times.size, 3)


def test_chain_off_stride_final_record():
    model = ChainModel(2, 4, 1.0, 1.0)
    tr = evolve_chain_exact(model, [-1, -2], EvolveConfig(0.35, dt=0.1, method="expm",
                                                          record_stride=2))
    ref = evolve_chain_exact(model, [-1, -2], EvolveConfig(0.35, dt=0.35, method="expm"))
    assert tr.times[-1] == pytest.approx(0.35)
    np.testing.assert_allclose(tr.probs[-1], ref.probs[-1], atol=1e-12)


def test_chain_without_bonds_factorizes():
    N = 6
    model = ChainModel(2, N, 1.0, 0.0)
    tr = evolve_chain_exact(model, [-2, 0], EvolveConfig(0.3, dt=0.3, method="expm"))
    dot = DotModel(N, 1.0)
    cfg = EvolveConfig(0.3, dt=0.3, method="expm")
    p0 = evolve_dot(dot, SizeDistribution.delta(SizeGrid(N, 1), 1), cfg)[-1][1]
    p1 = evolve_dot(dot, SizeDistribution.delta(SizeGrid(N, 1), 3), cfg)[-1][1]
    joint = np.outer(p0.probs, p1.probs).ravel()
    np.testing.assert_allclose(tr.probs[-1], joint, atol=1e-10)


def test_generating_function_slope_is_first_moment():
    model = DotModel(30, 1.0)
    d = evolve_dot(model, SizeDistribution.delta(SizeGrid(30, 1), 3),
                   EvolveConfig(0.3, record_stride=10 ** 9))[-1][1]
    h = 1e-5
    slope = (generating_function(d, h) - generating_function(d, -h)) / (2 * h)
    assert slope == pytest.approx(-otoc_moment(d, 1), abs=1e-6)
    zero = SizeDistribution.delta(SizeGrid(30, 1), 15)
    assert generating_function(zero, 123.0) == 1.0
