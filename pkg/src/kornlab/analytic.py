"""Closed-form scalar fields with exact first and second derivatives.

Derivatives are carried by :class:`Jet`, a second-order dual number in two
variables. Every elementary operation propagates value, gradient and Hessian
together, so a field built from the combinators below can be evaluated with
its exact derivatives on whole arrays of points at once.

    >>> x, y = coord_x(), coord_y()
    >>> f = sin(np.pi * x) * (1 + y * y)
    >>> j = f.jet(0.5, 2.0)
    >>> float(j.v), float(j.dyy)
    (5.0, 2.0)
"""
from __future__ import annotations

from typing import Callable

import numpy as np


class Jet:
    """Truncated second-order Taylor data ``(v, dx, dy, dxx, dxy, dyy)``."""

    __slots__ = ("v", "dx", "dy", "dxx", "dxy", "dyy")
    __array_priority__ = 100

    def __init__(self, v, dx=0.0, dy=0.0, dxx=0.0, dxy=0.0, dyy=0.0):
        self.v = v
        self.dx = dx
        self.dy = dy
        self.dxx = dxx
        self.dxy = dxy
        self.dyy = dyy

    @classmethod
    def variable(cls, values, axis: int) -> "Jet":
        values = np.asarray(values, dtype=float)
        one, zero = np.ones_like(values), np.zeros_like(values)
        if axis == 0:
            return cls(values, one, zero, zero, zero, zero)
        return cls(values, zero, one, zero, zero, zero)

    def chain(self, g, g1, g2) -> "Jet":
        """Compose a univariate function with value ``g``, slope ``g1`` and
        curvature ``g2`` (all evaluated at ``self.v``)."""
        return Jet(
            g,
            g1 * self.dx,
            g1 * self.dy,
            g2 * self.dx * self.dx + g1 * self.dxx,
            g2 * self.dx * self.dy + g1 * self.dxy,
            g2 * self.dy * self.dy + g1 * self.dyy,
        )

    @property
    def grad(self):
        return self.dx, self.dy

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.dx + other.dx, self.dy + other.dy,
                       self.dxx + other.dxx, self.dxy + other.dxy, self.dyy + other.dyy)
        return Jet(self.v + other, self.dx, self.dy, self.dxx, self.dxy, self.dyy)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.dx, -self.dy, -self.dxx, -self.dxy, -self.dyy)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self, other
            return Jet(
                a.v * b.v,
                a.dx * b.v + a.v * b.dx,
                a.dy * b.v + a.v * b.dy,
                a.dxx * b.v + 2 * a.dx * b.dx + a.v * b.dxx,
                a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy,
                a.dyy * b.v + 2 * a.dy * b.dy + a.v * b.dyy,
            )
        return Jet(self.v * other, self.dx * other, self.dy * other,
                   self.dxx * other, self.dxy * other, self.dyy * other)

    __rmul__ = __mul__

    def reciprocal(self):
        r = 1.0 / self.v
        return self.chain(r, -r * r, 2 * r * r * r)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if k == 0:
            return Jet(np.ones_like(np.asarray(self.v, dtype=float)))
        if k == 1:
            return self
        v = self.v
        return self.chain(v**k, k * v ** (k - 1), k * (k - 1) * v ** (k - 2))


def _lift(x) -> Jet:
    return x if isinstance(x, Jet) else Jet(x)


def jsin(a: Jet) -> Jet:
    s, c = np.sin(a.v), np.cos(a.v)
    return a.chain(s, c, -s)


def jcos(a: Jet) -> Jet:
    s, c = np.sin(a.v), np.cos(a.v)
    return a.chain(c, -s, -c)


def jexp(a: Jet) -> Jet:
    e = np.exp(a.v)
    return a.chain(e, e, e)


def jsinh(a: Jet) -> Jet:
    s, c = np.sinh(a.v), np.cosh(a.v)
    return a.chain(s, c, s)


def jcosh(a: Jet) -> Jet:
    s, c = np.sinh(a.v), np.cosh(a.v)
    return a.chain(c, s, c)


def bump_values(s, lo: float, hi: float):
    """Standard bump ``exp(-1/((s-lo)(hi-s)))`` on ``(lo, hi)``, zero outside.

    Returns the value and first two derivatives with respect to ``s``.
    """
    s = np.asarray(s, dtype=float)
    inside = (s > lo) & (s < hi)
    q = np.where(inside, (s - lo) * (hi - s), 1.0)
    dq = (hi - s) - (s - lo)
    ddq = -2.0
    g = np.where(inside, np.exp(-1.0 / q), 0.0)
    # d/ds exp(-1/q) = g * q'/q^2
    w = dq / q**2
    g1 = g * w
    dw = ddq / q**2 - 2 * dq * dq / q**3
    g2 = g * (w * w + dw)
    return g, np.where(inside, g1, 0.0), np.where(inside, g2, 0.0)


def bump_prime_values(s, lo: float, hi: float):
    """First, second and third derivative of the bump, zero outside ``(lo, hi)``."""
    s = np.asarray(s, dtype=float)
    inside = (s > lo) & (s < hi)
    q = np.where(inside, (s - lo) * (hi - s), 1.0)
    dq = (hi - s) - (s - lo)
    g = np.where(inside, np.exp(-1.0 / q), 0.0)
    # g = exp(-1/q) and w = q'/q^2; q is quadratic with q'' = -2
    w = dq / q**2
    dw = -2.0 / q**2 - 2 * dq * dq / q**3
    ddw = 12 * dq / q**3 + 6 * dq**3 / q**4
    g1 = g * w
    g2 = g * (w * w + dw)
    g3 = g * (w**3 + 3 * w * dw + ddw)
    return tuple(np.where(inside, t, 0.0) for t in (g1, g2, g3))


def jbump(a: Jet, lo: float, hi: float) -> Jet:
    return a.chain(*bump_values(a.v, lo, hi))


def jbump_prime(a: Jet, lo: float, hi: float) -> Jet:
    return a.chain(*bump_prime_values(a.v, lo, hi))


class AnalyticScalar:
    """A scalar field of ``(x, y)`` given as a composition of closed forms.

    One-dimensional fields use ``x`` as their variable and ignore ``y``.
    """

    def __init__(self, fn: Callable[[Jet, Jet], Jet], label: str = "f"):
        self.fn = fn
        self.label = label

    def jet(self, x, y=0.0) -> Jet:
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = _lift(self.fn(Jet.variable(x, 0), Jet.variable(y, 1)))
        # constants carry scalar derivative slots; broadcast them
        return Jet(*(np.broadcast_to(np.asarray(getattr(out, k), float), x.shape)
                     for k in Jet.__slots__))

    def __call__(self, x, y=0.0):
        return self.jet(x, y).v

    def derivative(self, x):
        """First derivative of a one-dimensional field."""
        return self.jet(x).dx

    def _binary(self, other, op, sym):
        if isinstance(other, AnalyticScalar):
            f, g = self.fn, other.fn
            return AnalyticScalar(lambda x, y: op(_lift(f(x, y)), _lift(g(x, y))),
                                  f"({self.label}{sym}{other.label})")
        f, c = self.fn, other
        return AnalyticScalar(lambda x, y: op(_lift(f(x, y)), c), f"({self.label}{sym}{c})")

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        f = self.fn
        return AnalyticScalar(lambda x, y: -_lift(f(x, y)), f"-{self.label}")

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b, "/")

    def __pow__(self, k: int):
        f = self.fn
        return AnalyticScalar(lambda x, y: _lift(f(x, y)) ** k, f"{self.label}^{k}")

    def __repr__(self):
        return f"AnalyticScalar({self.label})"


def _unary(name, jfn):
    def apply(f: AnalyticScalar) -> AnalyticScalar:
        if not isinstance(f, AnalyticScalar):
            f = constant(f)
        g = f.fn
        return AnalyticScalar(lambda x, y: jfn(_lift(g(x, y))), f"{name}({f.label})")
    apply.__name__ = name
    return apply


sin = _unary("sin", jsin)
cos = _unary("cos", jcos)
exp = _unary("exp", jexp)
sinh = _unary("sinh", jsinh)
cosh = _unary("cosh", jcosh)


def coord_x() -> AnalyticScalar:
    return AnalyticScalar(lambda x, y: x, "x")


def coord_y() -> AnalyticScalar:
    return AnalyticScalar(lambda x, y: y, "y")


def constant(c: float) -> AnalyticScalar:
    return AnalyticScalar(lambda x, y: Jet(np.asarray(c, float)), repr(c))


def polynomial(coeffs, var: str = "x") -> AnalyticScalar:
    """``sum(c_k * s**k)`` in the variable ``var`` (Horner evaluation)."""
    coeffs = [float(c) for c in coeffs]
    pick = (lambda x, y: x) if var == "x" else (lambda x, y: y)

    def fn(x, y):
        s = pick(x, y)
        acc = Jet(np.asarray(coeffs[-1]))
        for c in reversed(coeffs[:-1]):
            acc = acc * s + c
        return acc
    return AnalyticScalar(fn, f"poly_{var}{tuple(coeffs)}")


def bump(lo: float, hi: float, var: str = "x") -> AnalyticScalar:
    """Smooth compactly supported bump on ``(lo, hi)`` in ``var``."""
    pick = (lambda x, y: x) if var == "x" else (lambda x, y: y)
    return AnalyticScalar(lambda x, y: jbump(pick(x, y), lo, hi), f"bump_{var}({lo},{hi})")


def bump_prime(lo: float, hi: float, var: str = "x") -> AnalyticScalar:
    """Derivative of :func:`bump`, with its own exact first and second derivatives."""
    pick = (lambda x, y: x) if var == "x" else (lambda x, y: y)
    return AnalyticScalar(lambda x, y: jbump_prime(pick(x, y), lo, hi), f"bump'_{var}({lo},{hi})")


def trig_polynomial(cos_coeffs, sin_coeffs, omega: float = 1.0, var: str = "x") -> AnalyticScalar:
    """``sum_k a_k cos(k w s) + b_k sin(k w s)``, ``k = 0..len-1``."""
    a = np.asarray(cos_coeffs, float)
    b = np.asarray(sin_coeffs, float)
    pick = (lambda x, y: x) if var == "x" else (lambda x, y: y)

    def fn(x, y):
        s = pick(x, y)
        acc = Jet(np.asarray(a[0]))
        for k in range(1, len(a)):
            acc = acc + a[k] * jcos(s * (k * omega)) + b[k] * jsin(s * (k * omega))
        return acc
    return AnalyticScalar(fn, f"trig_{var}(deg={len(a) - 1})")


def random_trig_polynomial(rng: np.random.Generator, degree: int, omega: float = 1.0,
                           var: str = "x") -> AnalyticScalar:
    """Trig polynomial with coefficients uniform in [-1, 1]."""
    a = rng.uniform(-1, 1, degree + 1)
    b = rng.uniform(-1, 1, degree + 1)
    b[0] = 0.0
    return trig_polynomial(a, b, omega, var)


def random_trig_field(rng: np.random.Generator, degree: int, lx: float, ly: float) -> AnalyticScalar:
    """Separable-sum 2D trig field ``sum c_jk cos/sin(j pi x/lx) cos/sin(k pi y/ly)``."""
    terms = []
    for j in range(degree + 1):
        for k in range(degree + 1 - j):
            c = rng.uniform(-1, 1, 4)
            terms.append((j, k, c))
    wx, wy = np.pi / lx, np.pi / ly

    def fn(x, y):
        acc = Jet(np.asarray(0.0))
        for j, k, c in terms:
            cx, sx = jcos(x * (j * wx)), jsin(x * (j * wx))
            cy, sy = jcos(y * (k * wy)), jsin(y * (k * wy))
            acc = acc + c[0] * cx * cy + c[1] * cx * sy + c[2] * sx * cy + c[3] * sx * sy
        return acc
    return AnalyticScalar(fn, f"trig2d(deg={degree})")
