"""Oracle suite shared by the ``verify`` command and the tests."""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, List, Tuple

import numpy as np

from .algebra import chain_generator_from_algebra, exact_generators_agree
from .analytics import bidiagonal_spectrum, rates_finite_n, rates_large_n, tricomi_u
from .evolver import EvolveConfig, evolve_dot
from .model import (ChainModel, DotModel, SizeDistribution, SizeGrid, build_dot_generator_exact,
                    chain_rates, dot_coeffs_exact)

__all__ = ["CHECKS", "run_all"]


def check_generator_equality() -> Tuple[bool, str]:
    bad = [N for N in range(4, 65, 2) if not exact_generators_agree(N)]
    return not bad, "exact rational match for even N in [4, 64]" if not bad else f"mismatch at N={bad}"


def check_column_conservation() -> Tuple[bool, str]:
    for N in range(4, 65, 2):
        for parity in (0, 1):
            G = build_dot_generator_exact(N, parity)
            n = len(G)
            for j in range(n):
                if sum(G[i][j] for i in range(n)) != 0:
                    return False, f"column {j} of N={N}, parity {parity} does not sum to zero"
    return True, "every column sums to exactly zero for N <= 64"


def check_offdiagonal_sign() -> Tuple[bool, str]:
    for N in range(4, 65, 2):
        half = N // 2
        for m in range(-half, half + 1):
            _, cp, cm = dot_coeffs_exact(N, m)
            # only coefficients that couple to in-range neighbors are rates
            if (m + 2 <= half and cp < 0) or (m - 2 >= -half and cm < 0):
                return False, f"negative rate at N={N}, m={m}"
    return True, "off-diagonal rates are non-negative"


def check_chain_oracle() -> Tuple[bool, str]:
    model = ChainModel(3, 6, 0.7, 1.3)
    pts = SizeGrid(6, 1).points
    states = list(itertools.product(*[pts] * 3))
    G = chain_generator_from_algebra(model, states)
    worst = 0.0
    for s in states:
        up, dn = chain_rates(model, np.array(s))
        for x in range(3):
            for d, r in ((2, up[x]), (-2, dn[x])):
                t = list(s)
                t[x] += d
                ref = float(G.get(tuple(t), {}).get(s, Fraction(0)))
                worst = max(worst, abs(ref - r))
    return worst < 1e-12, f"max |closed form - ladder algebra| = {worst:.2e}"


def check_biorthogonality() -> Tuple[bool, str]:
    errs = [bidiagonal_spectrum(rates_large_n, 41, 1).biorthogonality_error(),
            bidiagonal_spectrum(lambda s: rates_finite_n(s, 10000), 41, 1).biorthogonality_error()]
    return max(errs) <= 1e-8, f"max defect {max(errs):.2e} at S_max = 41"


def check_integrators() -> Tuple[bool, str]:
    model = DotModel(64, 1.0)
    init = SizeDistribution.delta(SizeGrid(64, 1), 1)
    a = evolve_dot(model, init, EvolveConfig(0.5, method="rk4", record_stride=10**9))[-1][1]
    b = evolve_dot(model, init, EvolveConfig(0.5, dt=0.5, method="expm"))[-1][1]
    d = float(np.max(np.abs(a.probs - b.probs)))
    return d <= 1e-8, f"rk4 vs matrix exponential at N=64: {d:.2e}"


def check_kummer() -> Tuple[bool, str]:
    worst = 0.0
    for a, b, z in itertools.product((1.5, 2.5), (0.5, 1.0, 1.5), (0.3, 2.0, 20.0)):
        terms = (tricomi_u(a - 1, b, z), (b - 2 * a - z) * tricomi_u(a, b, z),
                 a * (a - b + 1) * tricomi_u(a + 1, b, z))
        worst = max(worst, abs(sum(terms)) / max(abs(t) for t in terms))
    return worst <= 1e-6, f"max relative recurrence residual {worst:.2e}"


CHECKS: List[Tuple[str, Callable]] = [
    ("generator-equality", check_generator_equality),
    ("column-conservation", check_column_conservation),
    ("offdiagonal-sign", check_offdiagonal_sign),
    ("chain-oracle", check_chain_oracle),
    ("biorthogonality", check_biorthogonality),
    ("rk4-vs-expm", check_integrators),
    ("kummer-recurrence", check_kummer),
]


def run_all():
    """Run every check; returns ``[(name, passed, detail)]``."""
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing oracle is a failed oracle
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
