"""Mapped bilinear-quadrilateral meshes on thin strips, form assembly, constraints.

Vector fields ``U = (u, v)`` use block ordering: all ``u`` dofs first, then all
``v`` dofs. Node ``(i, j)`` (``i`` across the thickness, ``j`` along the axis)
has index ``j * (nx + 1) + i``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import PeriodicIncompatibleProfiles, UnknownDescriptor
from .geometry import BoundarySelector, DistanceFunction, ThinDomain2D
from .operators import ConstCoeffOperator, VarCoeffOperatorLa

COMPONENTS = {"u": 0, "v": 1, "s": 0}


@dataclass(frozen=True)
class Mesh2D:
    domain: ThinDomain2D
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("nx and ny must be >= 2")

    @cached_property
    def nodes(self) -> np.ndarray:
        d = self.domain
        xi = np.linspace(0.0, 1.0, self.nx + 1)
        y = np.linspace(0.0, d.l, self.ny + 1)
        lo, hi = d.phi1(y), d.phi2(y)
        X = lo[:, None] + xi[None, :] * (hi - lo)[:, None]
        Y = np.broadcast_to(y[:, None], X.shape)
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def elements(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        n0 = (j * (self.nx + 1) + i).ravel()
        return np.column_stack([n0, n0 + 1, n0 + self.nx + 2, n0 + self.nx + 1])

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    def face_nodes(self, face: str) -> np.ndarray:
        grid = np.arange(self.n_nodes).reshape(self.ny + 1, self.nx + 1)
        return {"lower": grid[:, 0], "upper": grid[:, -1],
                "axial-start": grid[0, :], "axial-end": grid[-1, :]}[face].copy()

    def boundary_nodes(self, sel=None) -> np.ndarray:
        faces = sel if sel is not None else ("lower", "upper", "axial-start", "axial-end")
        return np.unique(np.concatenate([self.face_nodes(f) for f in faces]))

    @property
    def aspect_ratio(self) -> float:
        """Largest element length/width ratio (reported, never capped)."""
        p = self.nodes[self.elements]
        a = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        b = np.linalg.norm(p[:, 3] - p[:, 0], axis=1)
        return float(np.max(np.maximum(a / b, b / a)))

    def interpolate(self, fn) -> np.ndarray:
        """Nodal interpolant of ``fn(x, y)``."""
        return np.asarray(fn(self.nodes[:, 0], self.nodes[:, 1]), float)

    def interpolate_vector(self, fu, fv) -> np.ndarray:
        return np.concatenate([self.interpolate(fu), self.interpolate(fv)])


def build_mesh(d: ThinDomain2D, nx: int, ny: int) -> Mesh2D:
    return Mesh2D(d, nx, ny)


# reference bilinear element on [0, 1]^2, nodes (0,0), (1,0), (1,1), (0,1)
_REF = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _shape(r, s):
    N = np.stack([(1 - r) * (1 - s), r * (1 - s), r * s, (1 - r) * s], axis=-1)
    dr = np.stack([-(1 - s), 1 - s, s, -s], axis=-1)
    ds = np.stack([-(1 - r), -r, r, 1 - r], axis=-1)
    return N, np.stack([dr, ds], axis=-1)


@dataclass
class ElementData:
    N: np.ndarray  # (Q, 4)
    grads: np.ndarray  # (E, Q, 4, 2)
    w: np.ndarray  # (E, Q), includes det J
    points: np.ndarray  # (E, Q, 2)
    detJ: np.ndarray


def element_data(mesh: Mesh2D, quad_order: int = 3) -> ElementData:
    g, gw = np.polynomial.legendre.leggauss(quad_order)
    g, gw = (g + 1) / 2, gw / 2
    r, s = np.meshgrid(g, g, indexing="ij")
    r, s = r.ravel(), s.ravel()
    wq = np.outer(gw, gw).ravel()
    N, dN = _shape(r, s)  # (Q,4), (Q,4,2)
    X = mesh.nodes[mesh.elements]  # (E,4,2)
    J = np.einsum("eai,qaj->eqij", X, dN)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if np.any(det <= 0):
        raise ValueError("non-positive element Jacobian")
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] / det
    inv[..., 1, 1] = J[..., 0, 0] / det
    inv[..., 0, 1] = -J[..., 0, 1] / det
    inv[..., 1, 0] = -J[..., 1, 0] / det
    grads = np.einsum("qaj,eqji->eqai", dN, inv)
    pts = np.einsum("qa,eai->eqi", N, X)
    return ElementData(N, grads, det * wq[None, :], pts, det)


@dataclass
class SymmetricForm:
    matrix: sp.csr_matrix
    descriptor: str
    ncomp: int = 1
    meta: dict = field(default_factory=dict)

    def energy(self, c) -> float:
        c = np.asarray(c, float)
        return float(c @ (self.matrix @ c))


def _scatter(mesh: Mesh2D, ke: np.ndarray) -> sp.csr_matrix:
    conn = mesh.elements
    rows = np.repeat(conn[:, :, None], 4, axis=2).ravel()
    cols = np.repeat(conn[:, None, :], 4, axis=1).ravel()
    n = mesh.n_nodes
    A = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    return A


def _pair_stiffness(ed: ElementData, coef=None):
    """Directional matrices ``K[i][j]_ab = int c g_a,i g_b,j``."""
    w = ed.w if coef is None else ed.w * coef
    return [[np.einsum("eq,eqa,eqb->eab", w, ed.grads[..., i], ed.grads[..., j])
             for j in range(2)] for i in range(2)]


def _blocks(b00, b01, b10, b11):
    return sp.bmat([[b00, b01], [b10, b11]], format="csr")


SCALAR_FORMS = ("mass_scalar", "grad_scalar", "dx_scalar", "dy_scalar")
VECTOR_FORMS = ("mass_u_component", "mass_vector", "grad_vector", "strain")


def assemble(mesh: Mesh2D, descriptor: str, quad_order: int = 3, *, op=None,
             selector: BoundarySelector | None = None, power: float = 2.0,
             resolution: int = 1024) -> SymmetricForm:
    """Galerkin matrix of a named bilinear form.

    Scalar descriptors: ``mass_scalar``, ``grad_scalar``, ``dx_scalar``,
    ``dy_scalar``, ``operator_energy`` (``int grad w . A grad u`` with the
    symmetric part of a constant operator, or ``A(y)`` of ``L_a``) and
    ``weighted_grad`` (``int delta^power grad w . grad u``).
    Vector descriptors: ``mass_u_component``, ``mass_vector``, ``grad_vector``
    and ``strain`` (``int e(U) : e(W)``).
    """
    if quad_order not in (2, 3, 4):
        raise ValueError("quad_order must be 2, 3 or 4")
    ed = element_data(mesh, quad_order)
    n = mesh.n_nodes
    Z = sp.csr_matrix((n, n))
    meta = {"quad_order": quad_order, "nx": mesh.nx, "ny": mesh.ny}

    if descriptor in ("mass_scalar", "mass_u_component", "mass_vector"):
        M = _scatter(mesh, np.einsum("eq,qa,qb->eab", ed.w, ed.N, ed.N))
        if descriptor == "mass_scalar":
            return SymmetricForm(M, descriptor, 1, meta)
        V = M if descriptor == "mass_vector" else Z
        return SymmetricForm(_blocks(M, Z, Z, V), descriptor, 2, meta)

    if descriptor == "weighted_grad":
        if selector is None:
            raise ValueError("weighted_grad needs a Gamma_1 selector")
        delta = DistanceFunction(mesh.domain, selector, resolution)
        dq = delta(ed.points[..., 0], ed.points[..., 1])
        K = _pair_stiffness(ed, dq**power)
        meta.update(power=power, gamma1=selector.to_list())
        return SymmetricForm(_scatter(mesh, K[0][0] + K[1][1]), descriptor, 1, meta)

    if descriptor == "operator_energy":
        if isinstance(op, ConstCoeffOperator):
            A = op.sym
            coef = np.broadcast_to(A[:, :, None, None], (2, 2) + ed.w.shape)
        elif isinstance(op, VarCoeffOperatorLa):
            coef = op.matrix(ed.points[..., 1])
        else:
            raise ValueError("operator_energy needs op")
        ke = sum(np.einsum("eq,eq,eqa,eqb->eab", ed.w, coef[i, j], ed.grads[..., i], ed.grads[..., j])
                 for i in range(2) for j in range(2))
        return SymmetricForm(_scatter(mesh, ke), descriptor, 1, meta)

    K = _pair_stiffness(ed)
    Kxx, Kxy, Kyx, Kyy = (_scatter(mesh, K[0][0]), _scatter(mesh, K[0][1]),
                          _scatter(mesh, K[1][0]), _scatter(mesh, K[1][1]))
    if descriptor == "grad_scalar":
        return SymmetricForm(Kxx + Kyy, descriptor, 1, meta)
    if descriptor == "dx_scalar":
        return SymmetricForm(Kxx, descriptor, 1, meta)
    if descriptor == "dy_scalar":
        return SymmetricForm(Kyy, descriptor, 1, meta)
    if descriptor == "grad_vector":
        G = Kxx + Kyy
        return SymmetricForm(_blocks(G, Z, Z, G), descriptor, 2, meta)
    if descriptor == "strain":
        # e:e = u_x w_x + v_y z_y + (u_y + v_x)(w_y + z_x)/2
        S = _blocks(Kxx + 0.5 * Kyy, 0.5 * Kyx, 0.5 * Kxy, Kyy + 0.5 * Kxx)
        return SymmetricForm(S, descriptor, 2, meta)
    raise UnknownDescriptor(descriptor)


# ---------------------------------------------------------------- constraints

@dataclass(frozen=True)
class Dirichlet:
    selector: BoundarySelector
    components: tuple = ("u",)


@dataclass(frozen=True)
class PeriodicAxial:
    components: tuple = ("u",)


@dataclass(frozen=True)
class DeflateConstants:
    components: tuple = ("v",)


def _comp_index(c) -> int:
    return COMPONENTS[c] if isinstance(c, str) else int(c)


@dataclass
class ConstrainedSpace:
    """Reduced coordinates ``c_full = P @ c`` plus mean-zero constraints
    ``W.T @ c = 0`` (one column per deflated component)."""

    P: sp.csr_matrix
    W: np.ndarray
    dirichlet_dofs: np.ndarray
    periodic_pairs: np.ndarray
    ncomp: int

    @property
    def n_full(self) -> int:
        return self.P.shape[0]

    @property
    def n(self) -> int:
        return self.P.shape[1]

    def reduce(self, form) -> sp.csr_matrix:
        A = form.matrix if isinstance(form, SymmetricForm) else form
        return (self.P.T @ A @ self.P).tocsr()

    def expand(self, c) -> np.ndarray:
        return self.P @ c

    def free_full_dofs(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.P.sum(axis=1)).ravel() > 0)


def constrain(mesh: Mesh2D, ncomp: int, bcs=(), quad_order: int = 3) -> ConstrainedSpace:
    """Apply Dirichlet elimination, axial periodic identification and
    constant-mode deflation to the dof space of ``ncomp`` components."""
    nn = mesh.n_nodes
    n_full = ncomp * nn
    target = np.arange(n_full)
    fixed = np.zeros(n_full, bool)
    pairs = []
    deflate = []
    for bc in bcs:
        if isinstance(bc, Dirichlet):
            nodes = mesh.boundary_nodes(bc.selector)
            for c in bc.components:
                fixed[_comp_index(c) * nn + nodes] = True
        elif isinstance(bc, PeriodicAxial):
            if not mesh.domain.is_periodic_compatible():
                raise PeriodicIncompatibleProfiles("profiles are not periodic-compatible")
            start, end = mesh.face_nodes("axial-start"), mesh.face_nodes("axial-end")
            for c in bc.components:
                off = _comp_index(c) * nn
                target[off + end] = off + start
                pairs.append(np.column_stack([off + start, off + end]))
        elif isinstance(bc, DeflateConstants):
            deflate.extend(_comp_index(c) for c in bc.components)
        else:
            raise TypeError(f"unknown boundary condition {bc!r}")
    if np.any(fixed & (target != np.arange(n_full))):
        raise ValueError("a dof cannot be both Dirichlet and periodic")
    fixed |= fixed[target]
    masters = np.flatnonzero(~fixed & (target == np.arange(n_full)))
    col = -np.ones(n_full, int)
    col[masters] = np.arange(masters.size)
    rows = np.flatnonzero(~fixed)
    P = sp.csr_matrix((np.ones(rows.size), (rows, col[target[rows]])),
                      shape=(n_full, masters.size))
    W = np.zeros((masters.size, len(deflate)))
    if deflate:
        M = assemble(mesh, "mass_scalar", quad_order).matrix
        ones = M @ np.ones(nn)
        for k, c in enumerate(deflate):
            w = np.zeros(n_full)
            w[c * nn:(c + 1) * nn] = ones
            W[:, k] = P.T @ w
    pairs = np.vstack(pairs) if pairs else np.zeros((0, 2), int)
    return ConstrainedSpace(P, W, np.flatnonzero(fixed), pairs, ncomp)


# ---------------------------------------------------------------- dumps

def write_mesh_csv(mesh: Mesh2D, path, fields: dict | None = None) -> None:
    """Node table ``id, x, y, <field columns>``."""
    fields = fields or {}
    cols = {}
    for name, vals in fields.items():
        vals = np.asarray(vals)
        if vals.size == 2 * mesh.n_nodes:
            cols[f"{name}_u"], cols[f"{name}_v"] = vals[:mesh.n_nodes], vals[mesh.n_nodes:]
        else:
            cols[name] = vals
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y", *cols])
        for k, (x, y) in enumerate(mesh.nodes):
            w.writerow([k, repr(float(x)), repr(float(y)), *(repr(float(c[k])) for c in cols.values())])


def write_coo(A, path) -> None:
    """Matrix in coordinate text format, one ``i j value`` triple per line."""
    C = sp.coo_matrix(A)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        fh.write(f"% {C.shape[0]} {C.shape[1]} {C.nnz}\n")
        for k in order:
            fh.write(f"{C.row[k]} {C.col[k]} {C.data[k]!r}\n")
