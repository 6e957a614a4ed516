import math

import numpy as np
import pytest
import scipy.sparse as sp

from kornlab.discretize import build_mesh
from kornlab.errors import NoConvergence
from kornlab.geometry import Constant, Cosine, ThinDomain2D, rectangle
from kornlab.operators import VarCoeffOperatorLa, laplacian
from kornlab.solve import (
    KornSystem, Pencil, dense_generalized_eig, field_ratio, korn_first_constant,
    smallest_generalized_eig, solve_elliptic, strong_ratio_sup,
)
from kornlab.verify import manufactured_convergence


def _laplace_1d(n):
    """P1 stiffness and mass on ``[0, 1]`` with Dirichlet ends (interior dofs)."""
    h = 1.0 / n
    e = np.ones(n - 1)
    K = sp.diags([-e[1:], 2 * e, -e[1:]], [-1, 0, 1]) / h
    M = sp.diags([e[1:], 4 * e, e[1:]], [-1, 0, 1]) * h / 6
    return K.tocsr(), M.tocsr()


def test_identical_pencil_has_unit_eigenvalue():
    _, M = _laplace_1d(40)
    r = smallest_generalized_eig(Pencil(M, M))
    assert r.value == pytest.approx(1.0, abs=1e-10)


def test_laplace_1d_eigenvalue():
    K, M = _laplace_1d(64)
    r = smallest_generalized_eig(Pencil(K, M))
    assert abs(r.value - math.pi**2) <= 0.005 * math.pi**2
    assert r.value == pytest.approx(dense_generalized_eig(Pencil(K, M))[0][0], rel=1e-10)


def test_korn_pencil_matches_dense_oracle():
    ks = KornSystem.build(rectangle(1.0), 8, 8, "dirichlet_ends")
    p = Pencil(ks.S, ks.G, ks.space.W)
    r = smallest_generalized_eig(p, 1e-12)
    assert r.value == pytest.approx(dense_generalized_eig(p)[0][0], rel=1e-8)
    assert np.all(np.abs(ks.space.W.T @ r.vector) <= 1e-10)


@pytest.mark.parametrize("d,nx,ny,bc", [
    (rectangle(0.2), 4, 20, "dirichlet_ends"),
    (ThinDomain2D(1.0, Cosine(0.0, 0.05, 2 * math.pi), Cosine(0.15, 0.03, 2 * math.pi)), 3, 16, "periodic"),
    (rectangle(0.5, 2.0), 4, 12, "periodic"),
])
def test_iterative_matches_dense_on_small_meshes(d, nx, ny, bc):
    it = korn_first_constant(d, nx, ny, bc)
    dense = korn_first_constant(d, nx, ny, bc, oracle=True)
    assert it.ndof <= 500
    assert it.K == pytest.approx(dense.K, rel=1e-8)
    assert it.K >= 1.0


def test_square_korn_constant_is_order_one():
    r = korn_first_constant(rectangle(1.0), 32, 32)
    assert 1.0 <= r.K <= 100


def test_korn_constant_grows_as_domain_thins():
    K = [korn_first_constant(rectangle(h), 4, 32).K for h in (0.4, 0.2, 0.1)]
    assert K[0] < K[1] < K[2]


def test_solver_reports_no_convergence():
    K, M = _laplace_1d(200)
    with pytest.raises(NoConvergence):
        smallest_generalized_eig(Pencil(K, M), 1e-30, max_iter=3)


def test_elliptic_reproduces_affine_data():
    d = ThinDomain2D(1.0, Constant(0.0), Cosine(0.2, 0.05, 2 * math.pi))
    m = build_mesh(d, 6, 24)
    u = solve_elliptic(laplacian(2), m, lambda x, y: x + y)
    np.testing.assert_allclose(u, m.nodes[:, 0] + m.nodes[:, 1], atol=1e-10)


def test_la_constant_coefficient_reproduces_kernel_function():
    c1 = 0.6
    m = build_mesh(rectangle(0.3), 6, 20)
    u = solve_elliptic(VarCoeffOperatorLa(Constant(c1)), m, lambda x, y: x + c1 * y)
    np.testing.assert_allclose(u, m.nodes[:, 0] + c1 * m.nodes[:, 1], atol=1e-10)


def test_manufactured_harmonic_order_two():
    r = manufactured_convergence(levels=(16, 32, 64), aspect=1)
    assert abs(r["order"] - 2) <= 0.3
    assert r["errors"][0] > r["errors"][1] > r["errors"][2]


def test_strong_ratio_probe_consistency():
    r = strong_ratio_sup(rectangle(0.2), 4, 32)
    assert r.probe_ratio == pytest.approx(r.R, rel=1e-6)
    assert r.R >= 1.0 / 3 - 1e-12


def test_strong_ratio_dominates_random_probes():
    d = rectangle(0.2)
    ks = KornSystem.build(d, 4, 32, "dirichlet_ends")
    r = strong_ratio_sup(d, 4, 32, system=ks)
    rng = np.random.default_rng(0)
    p = Pencil(ks.S, ks.G, ks.space.W)
    for _ in range(20):
        c = p.project(rng.normal(size=ks.space.n))
        assert field_ratio(ks, c, d.h) <= r.R * (1 + 1e-9)


def test_constant_v_field_is_rejected():
    d = rectangle(0.2)
    ks = KornSystem.build(d, 3, 12, "dirichlet_ends")
    nn = ks.mesh.n_nodes
    full = np.zeros(2 * nn)
    full[nn:] = 1.0
    c = ks.space.P.T @ full
    with pytest.raises(ValueError):
        field_ratio(ks, c, d.h)
