import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.core_linalg import (Frame3, bracket, det, gram, orthonormalize, orthonormalize_batch,
                                  solid_angle, solid_angle_batch)
from artifact.errors import DegenerateInput, ShapeError
from conftest import DRAWS
from oracles import bracket_by_cofactors, cofactor_det

seeds = st.integers(0, 2**32 - 1)
E = np.eye(8)


# -- orthonormalize ----------------------------------------------------------

def test_orthonormalize_identity():
    f = orthonormalize(E[:3, :4])
    np.testing.assert_allclose(f.matrix, E[:4, :3], atol=1e-15)


def test_orthonormalize_by_hand():
    e1, e2, e3 = E[:3, :3]
    f = orthonormalize([2 * e1, e1 + e2, e3])
    np.testing.assert_allclose(f.matrix, np.eye(3), atol=1e-15)


def test_orthonormalize_gaussian_7x3(rng):
    u = rng.standard_normal((3, 7))
    f = orthonormalize(u)
    assert np.abs(f.matrix.T @ f.matrix - np.eye(3)).max() < 1e-12
    # first column parallel to the first input, span preserved
    np.testing.assert_allclose(f.matrix[:, 0], u[0] / np.linalg.norm(u[0]), atol=1e-14)
    proj = f.matrix @ (f.matrix.T @ u.T)
    np.testing.assert_allclose(proj, u.T, atol=1e-12)


def test_orthonormalize_rank_deficient():
    with pytest.raises(DegenerateInput):
        orthonormalize([E[0, :4], E[1, :4], E[0, :4] + 2 * E[1, :4]])
    with pytest.raises(DegenerateInput):
        orthonormalize([E[0, :4], np.zeros(4), E[2, :4]])


@settings(max_examples=DRAWS)
@given(seeds, st.integers(4, 20))
def test_orthonormalize_property(seed, n):
    u = np.random.default_rng(seed).standard_normal((3, n))
    f = orthonormalize(u)
    assert np.abs(f.matrix.T @ f.matrix - np.eye(3)).max() < 1e-10


def test_orthonormalize_batch_matches_scalar(rng):
    u = rng.standard_normal((50, 6, 3))
    q, bad = orthonormalize_batch(u)
    assert not bad.any()
    for i in range(50):
        np.testing.assert_allclose(q[i], orthonormalize(u[i].T).matrix, atol=1e-13)
    u[3, :, 2] = u[3, :, 0]
    _, bad = orthonormalize_batch(u)
    assert bad[3] and bad.sum() == 1


def test_frame_rejects_non_orthonormal():
    with pytest.raises(DegenerateInput):
        Frame3(np.ones((4, 3)))
    with pytest.raises(ShapeError):
        Frame3(np.eye(4))


# -- det / gram ---------------------------------------------------------------

def test_det_identity_and_swap(rng):
    assert det(np.eye(4)) == 1.0
    m = rng.standard_normal((5, 5))
    assert det(m[:, [1, 0, 2, 3, 4]]) == pytest.approx(-det(m), rel=1e-12)


def test_det_nonsquare():
    with pytest.raises(ShapeError):
        det(np.ones((2, 3)))


def test_det_singular_is_zero():
    m = np.ones((3, 3))
    assert det(m) == 0.0


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_det_vs_cofactor(rng, k):
    for _ in range(20):
        m = rng.standard_normal((k, k))
        ref = cofactor_det(m)
        assert abs(det(m) - ref) <= 1e-10 * max(1.0, abs(ref))


@settings(max_examples=DRAWS)
@given(seeds)
def test_det_multiplicative(seed):
    r = np.random.default_rng(seed)
    a, b = r.standard_normal((2, 4, 4))
    lhs, rhs = det(a @ b), det(a) * det(b)
    # relative tolerance, with an absolute floor for nearly singular draws
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-13 * (np.linalg.norm(a) * np.linalg.norm(b)) ** 4)


def test_gram_examples(rng):
    np.testing.assert_array_equal(gram(E[:2, :3], E[:2, :3]), np.eye(2))
    a = rng.standard_normal((3, 5))
    g = gram(a, a)
    np.testing.assert_allclose(g, g.T)
    assert np.linalg.eigvalsh(g).min() > -1e-12
    assert det(gram([[1, 0], [1, 1]], [[1, 0], [1, 1]])) == pytest.approx(1.0)
    with pytest.raises(ShapeError):
        gram(np.ones((2, 3)), np.ones((2, 4)))


# -- bracket --------------------------------------------------------------------

def test_bracket_basis_r4():
    np.testing.assert_array_equal(bracket(E[:3, :4]), -E[3, :4])


def test_bracket_shape_errors():
    with pytest.raises(ShapeError):
        bracket(np.ones((2, 4)))


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8, 9])
def test_bracket_vs_cofactors(rng, n):
    v = rng.standard_normal((n - 1, n))
    np.testing.assert_allclose(bracket(v), bracket_by_cofactors(v), rtol=1e-10, atol=1e-10)


@settings(max_examples=DRAWS)
@given(seeds, st.integers(4, 8))
def test_bracket_orthogonal_and_norm(seed, n):
    v = np.random.default_rng(seed).standard_normal((n - 1, n))
    x = bracket(v)
    scale = np.prod(np.linalg.norm(v, axis=1))
    assert np.abs(v @ x).max() <= 1e-10 * scale * np.linalg.norm(v, axis=1).max()
    g = det(gram(v, v))
    assert abs(x @ x - g) <= 1e-9 * max(g, 1e-300) + 1e-12 * scale**2


@settings(max_examples=DRAWS)
@given(seeds)
def test_bracket_double_identity(seed):
    a3, b3, x = np.random.default_rng(seed).standard_normal((3, 4))
    inner = bracket([a3, b3, x])
    outer = bracket([a3, b3, inner])
    d = (a3 @ a3) * (b3 @ b3) - (a3 @ b3) ** 2
    assert outer @ outer == pytest.approx((inner @ inner) * d, rel=1e-9, abs=1e-12)


# -- solid angle -----------------------------------------------------------------

def test_solid_angle_examples():
    e1, e2, e3 = np.eye(3)
    assert solid_angle(e1, e2, e3) == pytest.approx(math.pi / 2, abs=1e-15)
    assert solid_angle(e1, e2, e1 + e2) == 0.0
    assert solid_angle(e2, e1, e3) == pytest.approx(-math.pi / 2, abs=1e-15)


def test_solid_angle_errors():
    with pytest.raises(DegenerateInput):
        solid_angle([0, 0, 0], [1, 0, 0], [0, 1, 0])
    with pytest.raises(ShapeError):
        solid_angle([1, 0, 0, 0], [1, 0, 0], [0, 1, 0])


@settings(max_examples=DRAWS)
@given(seeds, st.floats(0.01, 100), st.floats(0.01, 100))
def test_solid_angle_antisymmetric_and_scale_free(seed, s1, s2):
    a, b, c = np.random.default_rng(seed).standard_normal((3, 3))
    w = solid_angle(a, b, c)
    assert -2 * math.pi < w < 2 * math.pi
    assert solid_angle(b, a, c) == pytest.approx(-w, abs=1e-12)
    assert solid_angle(a, c, b) == pytest.approx(-w, abs=1e-12)
    assert solid_angle(c, b, a) == pytest.approx(-w, abs=1e-12)
    assert solid_angle(s1 * a, b, s2 * c) == pytest.approx(w, abs=1e-12)


def test_solid_angle_batch_matches(rng):
    a, b, c = rng.standard_normal((3, 40, 3))
    ref = [solid_angle(a[i], b[i], c[i]) for i in range(40)]
    np.testing.assert_allclose(solid_angle_batch(a, b, c), ref, atol=1e-15)
