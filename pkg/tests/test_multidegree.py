import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.errors import IllConditioned, InvalidInput, ShapeError
from artifact.multidegree import (DENOMINATOR_DEGREES, NUMERATOR_DEGREES, MultiGraph, antisymmetry_filter,
                                  denominator_coefficients, denominator_monomials, enumerate_multigraphs,
                                  fit_numerator, lk2_kernel_configs, monomial_eval, numerator_basis,
                                  sample_configs)
from conftest import DRAWS
from oracles import random_orthogonal


def brute_force_count(degrees):
    # every multiset of edges (i <= j) whose degree sequence matches
    n = len(degrees)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    m = sum(degrees) // 2
    count = 0
    for combo in itertools.combinations_with_replacement(pairs, m):
        deg = [0] * n
        for i, j in combo:
            deg[i] += 1
            deg[j] += 1
        count += deg == list(degrees)
    return count


# -- enumeration ---------------------------------------------------------------------

def test_counts():
    assert len(enumerate_multigraphs(NUMERATOR_DEGREES)) == 56
    assert len(enumerate_multigraphs(DENOMINATOR_DEGREES)) == 6
    assert len(enumerate_multigraphs((1, 1))) == 1
    assert len(numerator_basis()) == 42


@pytest.mark.parametrize("degrees", [(1, 1, 3, 1, 1, 3), (2, 2, 2), (1, 2, 3, 2), (4, 0, 2)])
def test_enumeration_matches_brute_force(degrees):
    graphs = enumerate_multigraphs(degrees)
    assert len(graphs) == brute_force_count(degrees)
    assert all(g.degrees == tuple(degrees) for g in graphs)


def test_enumeration_rejects_odd_sum():
    with pytest.raises(InvalidInput):
        enumerate_multigraphs((1, 2))


def test_denominator_graphs_are_p_monomials():
    for g in enumerate_multigraphs(DENOMINATOR_DEGREES):
        assert set(g.edges) <= {(2, 2), (5, 5), (2, 5)}
        assert g.edges.count((2, 2)) == g.edges.count((5, 5))


def test_antisymmetry_filter():
    with_pair = MultiGraph(((0, 1), (2, 2), (2, 3), (3, 5), (4, 5), (5, 5)))
    without = MultiGraph(((0, 2), (1, 5), (2, 2), (3, 5), (4, 5), (2, 5)))
    with_primed = MultiGraph(((0, 2), (1, 2), (2, 5), (3, 4), (5, 5)))
    kept = antisymmetry_filter([with_pair, without, with_primed])
    assert kept == {without}


def test_multigraph_validation():
    g = MultiGraph(((2, 0), (1, 1)))
    assert g.edges == ((0, 2), (1, 1)) and g.degrees == (1, 2, 1, 0, 0, 0)
    assert g.label == "0-2 1-1"
    with pytest.raises(InvalidInput):
        MultiGraph(((0, 6),))


# -- evaluation ----------------------------------------------------------------------

def test_monomial_eval_examples(rng):
    v = np.eye(6)
    v[2] *= 2.0
    loops = MultiGraph(((2, 2), (2, 2)))
    assert monomial_eval(loops, v) == 16.0
    assert monomial_eval(MultiGraph(()), rng.standard_normal((6, 4))) == 1.0
    with pytest.raises(ShapeError):
        monomial_eval(loops, np.ones((5, 4)))


def test_monomial_eval_automorphism(rng):
    # swapping the two halves maps this graph to itself
    g = MultiGraph(((0, 5), (3, 2), (1, 2), (4, 5), (2, 5), (2, 2), (5, 5)))
    v = rng.standard_normal((6, 4))
    swapped = v[[3, 4, 5, 0, 1, 2]]
    assert monomial_eval(g, swapped) == pytest.approx(monomial_eval(g, v), rel=1e-12)


@settings(max_examples=DRAWS)
@given(st.integers(0, 2**32 - 1), st.integers(0, 41))
def test_monomial_eval_orthogonal_invariance(seed, idx):
    rng = np.random.default_rng(seed)
    g = numerator_basis()[idx]
    v = rng.standard_normal((6, 4))
    q = random_orthogonal(4, rng)
    a, b = monomial_eval(g, v), monomial_eval(g, v @ q.T)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


# -- denominator ------------------------------------------------------------------------

def test_denominator_coefficients_by_symbolic_expansion():
    u, x = sympy.symbols("u x")
    target = sympy.Poly(sympy.expand(u**2 * (u - x**2) ** 3), u, x)
    want = [target.coeff_monomial(u ** (5 - p) * x ** (2 * p)) for p in range(6)]
    np.testing.assert_array_equal(denominator_coefficients(), np.array(want, dtype=float))


def test_denominator_polynomial_numeric(rng):
    v = rng.standard_normal((50, 6, 4))
    a, b = v[:, 2], v[:, 5]
    u = (a * a).sum(-1) * (b * b).sum(-1)
    d = u - (a * b).sum(-1) ** 2
    np.testing.assert_allclose(denominator_monomials(v) @ denominator_coefficients(), u**2 * d**3, rtol=1e-9)


# -- fitting ----------------------------------------------------------------------------

def test_sample_configs():
    x = sample_configs(300, seed=2)
    assert x.shape == (300, 6, 4)
    a, b = x[:, 2], x[:, 5]
    rel = 1 - (a * b).sum(-1) ** 2 / ((a * a).sum(-1) * (b * b).sum(-1))
    assert rel.min() > 0.05
    np.testing.assert_array_equal(x, sample_configs(300, seed=2))


def test_fit_recovers_kernel():
    d = denominator_coefficients()
    fit = fit_numerator(sample_configs(500, seed=0), d, lk2_kernel_configs)
    assert fit.relative_residual < 1e-6
    # no Gram identity reaches this multidegree in R^4, so the basis is independent
    assert fit.rank == 42
    fresh = sample_configs(1000, seed=77, min_rel_disc=0.1)
    want = lk2_kernel_configs(fresh)
    got = fit.predict(fresh, d)
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-6


def test_fit_zero_oracle():
    fit = fit_numerator(sample_configs(300, seed=1), denominator_coefficients(),
                        lambda x: np.zeros(len(x)))
    assert all(c == 0.0 for c in fit.coefficients.values())


def test_fit_single_monomial_round_trip():
    basis = numerator_basis()
    target = basis[7]
    d = denominator_coefficients()

    def oracle(x):
        return monomial_eval(target, x) / np.sqrt(denominator_monomials(x) @ d)

    x = sample_configs(400, seed=5)
    fit = fit_numerator(x, d, oracle)
    assert fit.rank == 42
    coef = np.array([fit.coefficients[g] for g in basis])
    want = np.zeros(42)
    want[7] = 1.0
    np.testing.assert_allclose(coef, want, atol=1e-8)


def test_fit_with_printed_signs_fails():
    # the sign pattern (1, 3, -1, -3, 0, 0) is not a denominator of the kernel
    d = np.array([1.0, 3.0, -1.0, -3.0, 0.0, 0.0])
    with pytest.raises((IllConditioned, InvalidInput)):
        fit_numerator(sample_configs(500, seed=0), d, lk2_kernel_configs)


def test_fit_preconditions():
    d = denominator_coefficients()
    with pytest.raises(InvalidInput):
        fit_numerator(sample_configs(100, seed=0), d, lk2_kernel_configs)
    with pytest.raises(ShapeError):
        fit_numerator(np.ones((300, 5, 4)), d, lk2_kernel_configs)
