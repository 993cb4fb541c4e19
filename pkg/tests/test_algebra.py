import itertools
from fractions import Fraction

import numpy as np
import pytest

from chaos_lab.algebra import (build_dot_generator_from_algebra, chain_generator_from_algebra,
                               dot_liouvillian_exact, exact_generators_agree)
from chaos_lab.model import (ChainModel, DotModel, SizeGrid, build_dot_generator,
                             build_dot_generator_exact, chain_rates)


@pytest.mark.parametrize("N", [4, 6, 10, 18, 32])
def test_closed_form_matches_ladder_algebra(N):
    assert exact_generators_agree(N)


def test_float_algebra_generator_with_truncation():
    model = DotModel(40, 0.9)
    for grid in (SizeGrid(40, 1), SizeGrid(40, 0, 6)):
        np.testing.assert_allclose(build_dot_generator_from_algebra(model, grid),
                                   build_dot_generator(model, grid), atol=1e-13)


def test_liouvillian_columns_sum_to_zero():
    G = dot_liouvillian_exact(12, 0)
    for j in range(len(G)):
        assert sum(G[i][j] for i in range(len(G))) == 0
    assert G == build_dot_generator_exact(12, 0)


@pytest.mark.parametrize("couplings", [(1.0, 1.0), (0.0, 1.0), (0.5, 0.0)])
def test_chain_rates_match_tensor_algebra(couplings):
    N, L = 4, 3
    model = ChainModel(L, N, *couplings)
    pts = SizeGrid(N, 1).points
    states = list(itertools.product(*[pts] * L))
    G = chain_generator_from_algebra(model, states)
    for s in states:
        up, dn = chain_rates(model, np.array(s))
        col = sum(G[t].get(s, Fraction(0)) for t in states)
        assert col == 0
        for x in range(L):
            for d, rate in ((2, up[x]), (-2, dn[x])):
                t = list(s)
                t[x] += d
                ref = G.get(tuple(t), {}).get(s, Fraction(0))
                assert float(ref) == pytest.approx(rate, abs=1e-12)
