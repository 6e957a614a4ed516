import math

import numpy as np
import pytest

from kornlab.analytic import bump, bump_prime, coord_x, coord_y, random_trig_field
from kornlab.ansatz import cosh_sine_field, rigid_field, shear_ansatz
from kornlab.discretize import assemble, build_mesh
from kornlab.geometry import Cosine, ThinDomain2D, rectangle
from kornlab.verify import fit_scaling

HS = (0.2, 0.1, 0.05, 0.025)


def test_analytic_derivatives_match_finite_differences():
    rng = np.random.default_rng(0)
    f = random_trig_field(rng, 3, 0.3, 1.0) * bump(0.0, 1.0, "y") + coord_x() * coord_y() ** 3
    x, y = rng.uniform(0, 0.3, 50), rng.uniform(0.05, 0.95, 50)
    e = 1e-5
    j = f.jet(x, y)
    assert np.max(np.abs((f(x + e, y) - f(x - e, y)) / (2 * e) - j.dx)) <= 1e-6
    assert np.max(np.abs((f(x, y + e) - f(x, y - e)) / (2 * e) - j.dy)) <= 1e-6
    fx = lambda x, y: f.jet(x, y).dx
    assert np.max(np.abs((fx(x, y + e) - fx(x, y - e)) / (2 * e) - j.dxy)) <= 1e-5


def test_bump_prime_is_derivative():
    s = np.linspace(0.01, 0.99, 200)
    np.testing.assert_allclose(bump_prime(0.0, 1.0).jet(s).v, bump(0.0, 1.0).jet(s).dx, atol=1e-14)


def test_cosh_sine_is_harmonic():
    f = cosh_sine_field(0.1, 0.2, 1.3)
    rng = np.random.default_rng(1)
    j = f.jet(rng.uniform(0, 0.1, 10_000), rng.uniform(0.2, 1.3, 10_000))
    assert np.max(np.abs(j.dxx + j.dyy)) <= 1e-12 * max(1.0, f.k**2)


def test_cosh_sine_vanishes_at_ends():
    f = cosh_sine_field(0.1, 0.2, 1.3)
    x = np.linspace(0, 0.1, 33)
    assert np.max(np.abs(f(x, 0.2))) <= 1e-14
    assert np.max(np.abs(f(x, 1.3))) <= 1e-14


@pytest.mark.parametrize("h", HS)
def test_cosh_sine_closed_form_matches_quadrature(h):
    f = cosh_sine_field(h)
    exact, quad = f.exact_norms(), f.quadrature_norms()
    for k in exact:
        assert quad[k] == pytest.approx(exact[k], rel=1e-10)


def test_cosh_sine_ratio_bounded():
    p = fit_scaling([(h, cosh_sine_field(h).ratio()) for h in HS])[0]
    assert -0.3 <= p <= 0.3


def test_kirchhoff_shear_has_no_shear_strain():
    U = shear_ansatz(h=0.1, alpha=0.0, variant="kirchhoff")
    rng = np.random.default_rng(2)
    e = U.strain(rng.uniform(0, 0.1, 500), rng.uniform(0.01, 0.99, 500))
    assert np.max(np.abs(e[0, 1])) <= 1e-14


def test_plain_variant_has_shear_strain():
    U = shear_ansatz(bump(0.0, 1.0), h=0.1, alpha=0.0, variant="plain")
    y = np.linspace(0.1, 0.9, 50)
    e = U.strain(np.full_like(y, 0.05), y)
    assert np.max(np.abs(e[0, 1])) > 1e-3
    en = U.energies()
    assert en["strain"] > 0 and en["grad"] > en["strain"]


def test_kirchhoff_strong_ratio_bounded():
    p = fit_scaling([(h, shear_ansatz(h=h, alpha=0.5).ratio()) for h in HS])[0]
    assert -0.3 <= p <= 0.3


def test_kirchhoff_needs_derivative():
    with pytest.raises(ValueError):
        shear_ansatz(bump(0.0, 1.0), h=0.1)


def test_rigid_field():
    d = ThinDomain2D(1.0, Cosine(0.0, 0.05, 2 * math.pi), Cosine(0.1, 0.02, 2 * math.pi))
    w = 1.7
    e = rigid_field((0.3, -1.0), w, d).energies()
    assert abs(e["strain"]) <= 1e-14
    assert e["grad"] == pytest.approx(2 * w * w * d.area, rel=1e-12)
    g = rigid_field((0.3, -1.0), 0.0).gradient(np.array([0.01, 0.02]), np.array([0.5, 0.6]))
    assert np.all(g == 0)


@pytest.mark.parametrize("field", [
    lambda: shear_ansatz(h=0.05, alpha=0.5),
    lambda: shear_ansatz(bump(0.0, 1.0), h=0.05, alpha=0.25, variant="plain"),
    lambda: rigid_field((1.0, 2.0), 0.4),
])
def test_energies_stable_under_quadrature_doubling(field):
    U = field()
    a, b = U.energies(8), U.energies(16)
    for k in a:
        assert a[k] == pytest.approx(b[k], rel=1e-8, abs=1e-14)


def test_fem_interpolation_reproduces_energies():
    U = shear_ansatz(h=0.5, alpha=0.0, variant="kirchhoff")
    m = build_mesh(U.domain, 64, 64)
    c = U.nodal(m)
    exact = U.energies()
    assert assemble(m, "grad_vector").energy(c) == pytest.approx(exact["grad"], rel=0.01)
    assert assemble(m, "strain").energy(c) == pytest.approx(exact["strain"], rel=0.01)
    assert assemble(m, "mass_u_component").energy(c) == pytest.approx(exact["u"], rel=0.01)


def test_field_csv(tmp_path):
    U = rigid_field((0.0, 0.0), 1.0, rectangle(0.1))
    path = tmp_path / "u.csv"
    U.write_csv(path, [[0.05, 0.5], [0.0, 0.0]])
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,u,v,u_x,u_y,v_x,v_y" and len(lines) == 3
