"""Second-order elliptic operators and their ellipticity constants.

``ConstCoeffOperator`` is ``L(u) = sum a_ij u_{x_i x_j}`` in any dimension.
``VarCoeffOperatorLa`` is the two-dimensional family

    L_a(u) = (1 + a(y)^2) u_xx - 2 a(y) u_xy + u_yy - a'(y) u_x,

which is exactly ``div(A(y) grad u)`` with ``A = [[1+a^2, -a], [-a, 1]]``;
it arises when a curved strip is flattened by ``x1 = x - phi1(y)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import Jet
from .errors import MixedTermsPresent, NotElliptic
from .geometry import Profile, profile_from_dict, sup_on_interval


@dataclass(frozen=True)
class ConstCoeffOperator:
    a: np.ndarray

    def __init__(self, a):
        a = np.array(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise ValueError("coefficient matrix must be square with n >= 2")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def sym(self) -> np.ndarray:
        return (self.a + self.a.T) / 2

    def apply(self, hessian) -> np.ndarray:
        """``sum a_ij H_ij`` for a Hessian array of shape ``(n, n, ...)``."""
        return np.einsum("ij,ij...->...", self.a, hessian)

    def apply_jet(self, f: Jet):
        """``L(f)`` for a two-dimensional jet."""
        a = self.a
        return a[0, 0] * f.dxx + (a[0, 1] + a[1, 0]) * f.dxy + a[1, 1] * f.dyy

    def to_dict(self) -> dict:
        return {"n": self.n, "a": self.a.tolist()}

    def __eq__(self, other):
        return isinstance(other, ConstCoeffOperator) and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash(self.a.tobytes())


def laplacian(n: int = 2) -> ConstCoeffOperator:
    return ConstCoeffOperator(np.eye(n))


def ellipticity_constants(op: ConstCoeffOperator):
    """``(lam, Lam)``: smallest eigenvalue of the symmetric part, and the
    largest column sum of ``|a_ij|``. Raises :class:`NotElliptic` if ``lam <= 0``."""
    w, V = np.linalg.eigh(op.sym)
    lam = float(w[0])
    resid = np.linalg.norm(op.sym @ V[:, 0] - lam * V[:, 0])
    assert resid <= 1e-12 * max(1.0, np.abs(w).max())
    if lam <= 0:
        raise NotElliptic(f"smallest eigenvalue of symmetric part is {lam:.3g}")
    Lam = float(np.abs(op.a).sum(axis=0).max())
    return lam, Lam


def lambda_a(a_value):
    """Smallest eigenvalue of ``[[1+a^2, -a], [-a, 1]]``, in the stable form
    ``2 / (2 + a^2 + |a| sqrt(4 + a^2))``. Accepts arrays."""
    a = np.abs(np.asarray(a_value, dtype=float))
    out = 2.0 / (2.0 + a * a + a * np.sqrt(4.0 + a * a))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ShearMap:
    """Hyperplane ``x1 = a[0] + sum_{i>=1} a[i] x_{i+1}`` (zero-based)."""

    a: tuple

    def __init__(self, a):
        object.__setattr__(self, "a", tuple(float(v) for v in a))

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def A(self) -> float:
        return max(abs(v) for v in self.a)

    def jacobian(self) -> np.ndarray:
        """Linear part of ``y1 = x1 - a1 - sum a_i x_i, y_i = x_i``; det = 1."""
        T = np.eye(self.n)
        T[0, 1:] = -np.asarray(self.a[1:])
        return T

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, float)
        y = x @ self.jacobian().T
        y[..., 0] -= self.a[0]
        return y


def shear_transform(diag_op: ConstCoeffOperator, shear: ShearMap):
    """Operator in sheared coordinates, plus the claimed constants.

    Returns ``(L', lam_claimed, Lam_claimed)`` where ``L'`` follows from the
    chain rule ``u(x) = v(Tx - a1 e1)``, i.e. ``a'' = T B T^t`` with
    ``B = diag(b)``, ``lam_claimed = lambda_a(A)/(n-1)`` and
    ``Lam_claimed = Lam (1 + (n-1)(A + A^2))``.
    """
    b = np.diag(diag_op.a)
    if not np.allclose(diag_op.a, np.diag(b), rtol=0, atol=0):
        raise MixedTermsPresent("operator must be diagonal")
    if shear.n != diag_op.n:
        raise ValueError("dimension mismatch between operator and shear map")
    n = diag_op.n
    ai = np.asarray(shear.a[1:])
    coef = np.zeros((n, n))
    coef[0, 0] = b[0] + np.sum(b[1:] * ai**2)
    coef[0, 1:] = coef[1:, 0] = -b[1:] * ai
    coef[np.arange(1, n), np.arange(1, n)] = b[1:]
    _, Lam = ellipticity_constants(diag_op)
    A = shear.A
    return ConstCoeffOperator(coef), lambda_a(A) / (n - 1), Lam * (1 + (n - 1) * (A + A * A))


def corrected_sheared_lambda(diag_op: ConstCoeffOperator, shear: ShearMap) -> float:
    """Lower bound ``min(b) * lambda_a(A) / (n-1)`` valid for any positive ``b``."""
    lam, _ = ellipticity_constants(diag_op)
    return lam * lambda_a(shear.A) / (diag_op.n - 1)


@dataclass(frozen=True)
class VarCoeffOperatorLa:
    a_profile: Profile
    l: float = 1.0

    def coefficient(self, y):
        """``(a(y), a'(y))``."""
        v, d1, _ = self.a_profile.eval(y)
        return v, d1

    @property
    def M(self) -> float:
        return sup_on_interval(lambda y: np.abs(self.a_profile(y)), self.l)

    @property
    def M1(self) -> float:
        return sup_on_interval(lambda y: np.abs(self.a_profile.eval(y)[1]), self.l)

    def matrix(self, y):
        """Divergence-form coefficient ``A(y)`` with shape ``(2, 2, ...)``."""
        a, _ = self.coefficient(y)
        a = np.asarray(a, float)
        return np.array([[1 + a * a, -a], [-a, np.ones_like(a)]])

    def apply_jet(self, f: Jet, y):
        a, da = self.coefficient(y)
        return (1 + a * a) * f.dxx - 2 * a * f.dxy + f.dyy - da * f.dx

    def to_dict(self) -> dict:
        return {"La": {"a_profile": self.a_profile.to_dict(), "l": self.l}}


def operator_from_dict(d: dict):
    if "La" in d:
        return VarCoeffOperatorLa(profile_from_dict(d["La"]["a_profile"]), float(d["La"].get("l", 1.0)))
    op = ConstCoeffOperator(d["a"])
    if "n" in d and int(d["n"]) != op.n:
        raise ValueError("declared n does not match coefficient matrix")
    return op


def flatten_operator(phi1: Profile, l: float = 1.0) -> VarCoeffOperatorLa:
    """``L_a`` with ``a = phi1'``: the Laplacian after ``x1 = x - phi1(y)``."""
    return VarCoeffOperatorLa(phi1.derivative(), l)
