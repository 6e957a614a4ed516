import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kornlab.errors import MixedTermsPresent, NotElliptic
from kornlab.geometry import Affine, Constant, Cosine
from kornlab.operators import (
    ConstCoeffOperator, ShearMap, VarCoeffOperatorLa, corrected_sheared_lambda,
    ellipticity_constants, flatten_operator, lambda_a, laplacian, shear_transform,
)

GOLDEN_LAMBDA = (3 - math.sqrt(5)) / 2


def _chain_rule_check(b, a, op, trials=4, seed=0):
    """Check ``L_b[v(T x - a1 e1)] = L'[v](T x - a1 e1)`` on random quadratics ``v``.

    The left side is taken by central second differences in ``x``, which are
    exact for quadratics up to rounding.
    """
    n = len(b)
    rng = np.random.default_rng(seed)
    shear = ShearMap(a)
    step = 1e-2
    for _ in range(trials):
        Q = rng.normal(size=(n, n))
        Q = Q + Q.T
        c = rng.normal(size=n)
        v = lambda y: np.einsum("...i,ij,...j->...", y, Q, y) + y @ c
        u = lambda x: v(shear.forward(x))
        x0 = rng.normal(size=n)
        lhs = 0.0
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            lhs += b[i] * (u(x0 + e) - 2 * u(x0) + u(x0 - e)) / step**2
        rhs = float(np.sum(op.a * 2 * Q))
        assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-7)


def test_ellipticity_laplacian():
    assert ellipticity_constants(laplacian(2)) == (1.0, 1.0)


def test_ellipticity_diagonal():
    assert ellipticity_constants(ConstCoeffOperator(np.diag([2.0, 1.0]))) == (1.0, 2.0)


def test_ellipticity_shear_matrix():
    lam, Lam = ellipticity_constants(ConstCoeffOperator([[2.0, -1.0], [-1.0, 1.0]]))
    assert lam == pytest.approx(GOLDEN_LAMBDA, abs=1e-12)
    assert Lam == 3.0


def test_not_elliptic():
    with pytest.raises(NotElliptic):
        ellipticity_constants(ConstCoeffOperator([[1.0, 0.0], [0.0, -1.0]]))


def test_lambda_a_values():
    assert lambda_a(0.0) == 1.0
    assert lambda_a(1.0) == pytest.approx(2 / (3 + math.sqrt(5)), abs=1e-15)
    assert lambda_a(-1.0) == lambda_a(1.0)


def test_lambda_a_matches_eigenvalues():
    rng = np.random.default_rng(0)
    a = rng.uniform(-10, 10, 1000)
    ref = np.array([np.linalg.eigvalsh([[1 + t * t, -abs(t)], [-abs(t), 1]])[0] for t in a])
    np.testing.assert_allclose(lambda_a(a), ref, rtol=0, atol=1e-10)


def test_lambda_a_pointwise_bound():
    rng = np.random.default_rng(1)
    a, s, t = rng.uniform(-10, 10, (3, 10_000))
    lhs = (1 + a * a) * t * t - 2 * a * t * s + s * s
    rhs = lambda_a(a) * (t * t + s * s)
    assert np.all(lhs >= rhs * (1 - 1e-12) - 1e-300)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.floats(0, 1))
def test_lambda_a_monotone(M, frac):
    assert lambda_a(frac * M) >= lambda_a(M) * (1 - 1e-15)


def test_quadratic_form_bound_random_operators():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        a = rng.uniform(-1, 1, (n, n))
        a += n * np.eye(n)
        op = ConstCoeffOperator(a)
        lam, _ = ellipticity_constants(op)
        x = rng.normal(size=(1000, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        q = np.einsum("ki,ij,kj->k", x, a, x)
        assert np.all(q >= lam - 1e-10)


def test_shear_identity():
    diag = ConstCoeffOperator(np.diag([1.0, 2.0, 3.0]))
    op, lam_claim, Lam_claim = shear_transform(diag, ShearMap([0.0, 0.0, 0.0]))
    assert op == diag
    assert lam_claim == pytest.approx(1 / 2)
    assert Lam_claim == pytest.approx(3.0)


def test_shear_two_dimensional():
    op, lam_claim, Lam_claim = shear_transform(laplacian(2), ShearMap([0.0, 1.0]))
    np.testing.assert_allclose(op.a, [[2.0, -1.0], [-1.0, 1.0]], atol=0)
    lam, Lam = ellipticity_constants(op)
    assert lam == pytest.approx(GOLDEN_LAMBDA, abs=1e-12)
    assert lam >= lam_claim - 1e-12
    assert Lam == pytest.approx(3.0) and Lam_claim == pytest.approx(3.0)


def test_shear_three_dimensional():
    b, a = [1.0, 2.0, 1.0], [0.0, 0.5, -0.5]
    op, lam_claim, Lam_claim = shear_transform(ConstCoeffOperator(np.diag(b)), ShearMap(a))
    _chain_rule_check(b, a, op)
    lam, Lam = ellipticity_constants(op)
    assert lam >= lam_claim - 1e-12
    assert Lam <= Lam_claim + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.data())
def test_shear_matches_chain_rule(n, data):
    b = data.draw(st.lists(st.floats(0.1, 5), min_size=n, max_size=n))
    a = data.draw(st.lists(st.floats(-2, 2), min_size=n, max_size=n))
    op, _, _ = shear_transform(ConstCoeffOperator(np.diag(b)), ShearMap(a))
    _chain_rule_check(b, a, op, trials=2)
    lam, _ = ellipticity_constants(op)
    assert lam >= corrected_sheared_lambda(ConstCoeffOperator(np.diag(b)), ShearMap(a)) - 1e-12


def test_shear_jacobian_is_one():
    rng = np.random.default_rng(4)
    for n in range(2, 7):
        assert np.linalg.det(ShearMap(rng.uniform(-2, 2, n)).jacobian()) == pytest.approx(1.0)


def test_shear_rejects_mixed_terms():
    with pytest.raises(MixedTermsPresent):
        shear_transform(ConstCoeffOperator([[1.0, 0.1], [0.1, 1.0]]), ShearMap([0.0, 1.0]))


def test_flatten_constant_profile_is_laplacian():
    La = flatten_operator(Constant(0.0))
    y = np.linspace(0, 1, 11)
    a, da = La.coefficient(y)
    assert np.all(a == 0) and np.all(da == 0)
    assert La.M == 0


def test_flatten_affine_profile():
    La = flatten_operator(Affine(0.0, 0.7))
    a, da = La.coefficient(np.linspace(0, 1, 11))
    np.testing.assert_allclose(a, 0.7)
    np.testing.assert_allclose(da, 0.0)
    A = La.matrix(np.array([0.3]))[:, :, 0]
    np.testing.assert_allclose(A, [[1 + 0.49, -0.7], [-0.7, 1.0]])


def test_flatten_cosine_profile():
    La = flatten_operator(Cosine(0.0, 0.05, 2 * math.pi, 0.0))
    y = np.linspace(0, 1, 101)
    np.testing.assert_allclose(La.coefficient(y)[0], -0.05 * 2 * math.pi * np.sin(2 * math.pi * y),
                               atol=1e-15)
    assert La.M == pytest.approx(0.1 * math.pi, rel=1e-10)


def test_la_constant_coefficient_is_always_elliptic():
    for c in (-3.0, 0.0, 0.5, 10.0):
        La = VarCoeffOperatorLa(Constant(c))
        A = La.matrix(np.array([0.5]))[:, :, 0]
        assert np.linalg.eigvalsh(A)[0] == pytest.approx(lambda_a(c), rel=1e-12)
        assert lambda_a(c) > 0
