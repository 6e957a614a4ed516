"""Closed-form test fields: the cosh-sine harmonic field, shear ansatz fields
and rigid displacements, with their energies.

Energies are integrated by tensor Gauss quadrature over the field's support;
the cosh-sine field also has exact separable expressions.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .analytic import AnalyticScalar, Jet, bump, bump_prime, constant, coord_x, coord_y, cosh, sin
from .geometry import ThinDomain2D, rectangle
from .quadrature import gauss_legendre

VARIANTS = ("plain", "kirchhoff")


def _rule(d: ThinDomain2D, y_range, n: int, panels=(4, 32)):
    """Gauss rule on ``{y0 < y < y1, phi1 < x < phi2}``."""
    xi, wxi = gauss_legendre(0.0, 1.0, n, panels[0])
    y, wy = gauss_legendre(y_range[0], y_range[1], n, panels[1])
    lo, hi = d.phi1(y), d.phi2(y)
    X = lo[None, :] + xi[:, None] * (hi - lo)[None, :]
    Y = np.broadcast_to(y[None, :], X.shape)
    W = wxi[:, None] * (wy * (hi - lo))[None, :]
    return X.ravel(), np.ascontiguousarray(Y).ravel(), W.ravel()


def strong_ratio(grad: float, strain: float, u: float, h: float) -> float:
    """``||grad U||^2 / ((1/h)||u|| ||e(U)|| + ||e(U)||^2)`` from squared norms."""
    return grad / (math.sqrt(u * strain) / h + strain)


@dataclass
class AnalyticVectorField:
    """Displacement ``U = (u, v)`` with closed-form components on a domain.

    ``y_support`` restricts quadrature to the axial range where the field
    lives (the rest contributes nothing).
    """

    u: AnalyticScalar
    v: AnalyticScalar
    domain: ThinDomain2D
    y_support: tuple | None = None
    label: str = "U"

    def jets(self, x, y):
        return self.u.jet(x, y), self.v.jet(x, y)

    def gradient(self, x, y) -> np.ndarray:
        """``[[u_x, u_y], [v_x, v_y]]`` with shape ``(2, 2, ...)``."""
        ju, jv = self.jets(x, y)
        return np.array([[ju.dx, ju.dy], [jv.dx, jv.dy]])

    def strain(self, x, y) -> np.ndarray:
        g = self.gradient(x, y)
        return (g + g.transpose(1, 0, *range(2, g.ndim))) / 2

    def energies(self, quad_n: int = 8) -> dict:
        """Squared norms ``||grad U||^2``, ``||e(U)||^2``, ``||u||^2``, ``||v||^2``."""
        y_range = self.y_support or (0.0, self.domain.l)
        x, y, w = _rule(self.domain, y_range, quad_n)
        ju, jv = self.jets(x, y)
        e12 = (ju.dy + jv.dx) / 2
        return {
            "grad": float(w @ (ju.dx**2 + ju.dy**2 + jv.dx**2 + jv.dy**2)),
            "strain": float(w @ (ju.dx**2 + jv.dy**2 + 2 * e12**2)),
            "u": float(w @ ju.v**2),
            "v": float(w @ jv.v**2),
        }

    def ratio(self, h: float | None = None, quad_n: int = 8) -> float:
        e = self.energies(quad_n)
        return strong_ratio(e["grad"], e["strain"], e["u"], self.domain.h if h is None else h)

    def nodal(self, mesh) -> np.ndarray:
        """Block nodal vector ``[u; v]`` for a mesh of the same domain."""
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        return np.concatenate([self.u(x, y), self.v(x, y)])

    def write_csv(self, path, points) -> None:
        """Point cloud ``x, y, u, v, u_x, u_y, v_x, v_y``."""
        points = np.asarray(points, float)
        x, y = points[:, 0], points[:, 1]
        ju, jv = self.jets(x, y)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "y", "u", "v", "u_x", "u_y", "v_x", "v_y"])
            for row in zip(x, y, ju.v, jv.v, ju.dx, ju.dy, jv.dx, jv.dy):
                wr.writerow([repr(float(t)) for t in row])


class CoshSineField(AnalyticScalar):
    """``u = cosh(k (x - h/2)) sin(k (y - a))`` with ``k = pi/(b - a)``.

    Harmonic on ``[0, h] x [a, b]`` and zero on ``y = a`` and ``y = b``.
    With ``y`` measured from ``a`` the same field lives on ``rectangle(h, b - a)``.
    """

    def __init__(self, h: float, a: float, b: float):
        if not b > a:
            raise ValueError("need b > a")
        if not h > 0:
            raise ValueError("need h > 0")
        self.h, self.a, self.b = float(h), float(a), float(b)
        self.k = k = math.pi / (b - a)
        x, y = coord_x(), coord_y()
        f = cosh(k * (x - h / 2)) * sin(k * (y - a))
        super().__init__(f.fn, f"cosh_sine(h={h},a={a},b={b})")

    def exact_norms(self) -> dict:
        """``||u||^2``, ``||u_x||^2``, ``||u_y||^2``, ``||grad u||^2`` in closed form."""
        h, k, L = self.h, self.k, self.b - self.a
        ch = h / 2 + math.sinh(k * h) / (2 * k)    # int_0^h cosh^2(k(x - h/2))
        sh = math.sinh(k * h) / (2 * k) - h / 2    # int_0^h sinh^2(k(x - h/2))
        half = L / 2                                # int_a^b sin^2 = int_a^b cos^2
        ux, uy = k * k * sh * half, k * k * ch * half
        return {"u": ch * half, "u_x": ux, "u_y": uy, "grad": ux + uy}

    def quadrature_norms(self, quad_n: int = 8) -> dict:
        x, wx = gauss_legendre(0.0, self.h, quad_n, 4)
        y, wy = gauss_legendre(self.a, self.b, quad_n, 16)
        X, Y = np.meshgrid(x, y, indexing="ij")
        W = np.outer(wx, wy)
        j = self.jet(X, Y)
        ux, uy = np.sum(W * j.dx**2), np.sum(W * j.dy**2)
        return {"u": float(np.sum(W * j.v**2)), "u_x": float(ux), "u_y": float(uy),
                "grad": float(ux + uy)}

    def ratio(self, norms: dict | None = None) -> float:
        """``||grad u||^2 / ((1/h)||u|| ||u_x|| + ||u_x||^2)``."""
        n = norms or self.exact_norms()
        return n["grad"] / (math.sqrt(n["u"] * n["u_x"]) / self.h + n["u_x"])

    def domain(self) -> ThinDomain2D:
        return rectangle(self.h, self.b - self.a)

    def local(self) -> AnalyticScalar:
        """The field in coordinates with ``y`` measured from ``a``."""
        f, a = self.fn, self.a
        return AnalyticScalar(lambda x, y: f(x, y + a), self.label + "@local")


def cosh_sine_field(h: float, a: float = 0.0, b: float = 1.0) -> CoshSineField:
    return CoshSineField(h, a, b)


def _compose(f: AnalyticScalar, scale: float) -> AnalyticScalar:
    """``(x, y) -> f(y / scale)`` for a one-dimensional field ``f``."""
    g = f.fn
    zero = Jet(np.asarray(0.0))
    return AnalyticScalar(lambda x, y: g(y * (1.0 / scale), zero), f"{f.label}(y/{scale:g})")


def shear_ansatz(f: AnalyticScalar | None = None, h: float = 0.1, alpha: float = 0.5,
                 variant: str = "kirchhoff", *, f_prime: AnalyticScalar | None = None,
                 l: float = 1.0, support=None) -> AnalyticVectorField:
    """Bending-type field on the rectangle ``[0, h] x [0, l]``.

    With ``s = y / h^alpha``:

    * ``plain``:     ``U = (f(s), -(x / h^alpha) f(s))``
    * ``kirchhoff``: ``U = (f(s), -(x / h^alpha) f'(s))``

    ``f`` defaults to the bump ``exp(-1/(s(l - s)))`` on ``(0, l)``, so the
    field lives in ``0 <= y <= l h^alpha``. A custom ``f`` for the Kirchhoff
    variant needs ``f_prime`` (with exact derivatives of its own), and may
    pass its ``support`` in ``s`` to focus the quadrature.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if not 0 < h < 1:
        raise ValueError("need 0 < h < 1")
    if not 0 <= alpha <= 0.5:
        raise ValueError("need alpha in [0, 1/2]")
    if f is None:
        f, f_prime, support = bump(0.0, l), bump_prime(0.0, l), (0.0, l)
    if variant == "kirchhoff" and f_prime is None:
        raise ValueError("the kirchhoff variant needs f_prime")
    scale = h**alpha
    x = coord_x()
    u = _compose(f, scale)
    second = f if variant == "plain" else f_prime
    v = -(x * (1.0 / scale)) * _compose(second, scale)
    y_support = None
    if support is not None:
        y_support = (max(0.0, support[0] * scale), min(l, support[1] * scale))
    return AnalyticVectorField(u, v, rectangle(h, l), y_support,
                               f"shear_{variant}(h={h:g},alpha={alpha:g})")


def rigid_field(a=(0.0, 0.0), omega: float = 1.0, domain: ThinDomain2D | None = None) -> AnalyticVectorField:
    """Infinitesimal rigid motion ``U = (a1 - omega y, a2 + omega x)``."""
    x, y = coord_x(), coord_y()
    u = constant(float(a[0])) - omega * y
    v = constant(float(a[1])) + omega * x
    return AnalyticVectorField(u, v, domain or rectangle(0.1), None, f"rigid(omega={omega:g})")
