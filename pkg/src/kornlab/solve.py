"""Elliptic solves, generalized eigenproblems and Korn-constant computations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._optim import golden_section_max
from .discretize import (ConstrainedSpace, DeflateConstants, Dirichlet,
                         Mesh2D, PeriodicAxial, assemble, build_mesh, constrain)
from .errors import NoConvergence, SingularSystem
from .geometry import AXIAL_FACES, FACES, ThinDomain2D


@dataclass
class Pencil:
    """Symmetric pencil ``N c = mu D c`` on ``{c : W.T c = 0}``."""

    N: sp.spmatrix
    D: sp.spmatrix
    W: np.ndarray | None = None

    def __post_init__(self):
        n = self.N.shape[0]
        if self.W is None:
            self.W = np.zeros((n, 0))
        self.W = np.asarray(self.W, float).reshape(n, -1)

    @property
    def n(self) -> int:
        return self.N.shape[0]

    def project(self, X):
        """Euclidean projection onto ``W.T x = 0``."""
        W = self.W
        if W.shape[1] == 0:
            return X
        return X - W @ np.linalg.solve(W.T @ W, W.T @ X)


@dataclass
class EigResult:
    value: float
    vector: np.ndarray
    residual: float
    iterations: int
    values: np.ndarray = field(default=None, repr=False)
    stalled: bool = False


class _BorderedSolver:
    """Factorization of ``[[N - sigma D, W], [W.T, 0]]``."""

    def __init__(self, p: Pencil, sigma: float):
        A = p.N - sigma * p.D if sigma else p.N
        k = p.W.shape[1]
        if k:
            Wc = sp.csr_matrix(p.W)
            A = sp.bmat([[A, Wc], [Wc.T, None]])
        try:
            self.lu = spla.splu(sp.csc_matrix(A))
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from exc
        self.n, self.k, self.sigma = p.n, k, sigma

    def __call__(self, B):
        B = np.atleast_2d(B.T).T
        rhs = np.vstack([B, np.zeros((self.k, B.shape[1]))])
        X = self.lu.solve(rhs)
        if not np.all(np.isfinite(X)):
            raise SingularSystem("non-finite solution; pencil is singular at this shift")
        return X[:self.n]


def _residual(p: Pencil, x, mu):
    # scaled by max(1, |mu|) so that large eigenvalues are not held to an
    # unattainable absolute accuracy
    Dx = p.D @ x
    r = p.project((p.N @ x - mu * Dx)[:, None])[:, 0]
    return float(np.linalg.norm(r) / (max(1.0, abs(mu)) * np.linalg.norm(Dx)))


def _ritz(p: Pencil, Y):
    """Rayleigh-Ritz on ``span(Y)``; returns values and D-orthonormal vectors."""
    Q, _ = np.linalg.qr(p.project(Y))
    Nr, Dr = Q.T @ (p.N @ Q), Q.T @ (p.D @ Q)
    try:
        vals, vecs = la.eigh((Nr + Nr.T) / 2, (Dr + Dr.T) / 2)
    except la.LinAlgError as exc:
        raise SingularSystem("denominator form is not positive definite on the space") from exc
    return vals, Q @ vecs


def _lanczos(p: Pencil, solve, k: int, tol: float, rng):
    """Shift-invert Lanczos (ARPACK) with the bordered solve as ``OPinv``.

    ``D`` is typically only semidefinite (it vanishes on the deflated
    constants), which lets ARPACK drift into spurious vectors. Using
    ``D + beta W W^T`` as the inner product instead changes nothing on the
    constrained space, since the bordered solve annihilates ``range(W)``, but
    makes the inner product definite.
    """
    W = p.W
    beta = spla.norm(p.D, 1) / max(float(np.max(np.sum(W * W, axis=0), initial=0.0)), 1e-300)
    M = spla.LinearOperator(p.N.shape, matvec=lambda x: p.D @ x + beta * (W @ (W.T @ x)),
                            dtype=float)
    op = spla.LinearOperator(p.N.shape, matvec=lambda x: solve(x.reshape(-1, 1))[:, 0],
                             dtype=float)
    # a random start: a warm start can miss the minimiser after a mode crossing
    v0 = solve(p.D @ p.project(rng.standard_normal((p.n, 1))))[:, 0]
    _, vecs = spla.eigsh(p.N, k=k, M=M, sigma=solve.sigma, OPinv=op, which="LM",
                         v0=v0, tol=tol * 1e-3)
    return _ritz(p, vecs)


def smallest_generalized_eig(p: Pencil, tol: float = 1e-10, *, sigma: float = 0.0,
                             block: int = 6, max_iter: int = 500, x0=None,
                             seed: int = 0, stall_tol: float | None = None) -> EigResult:
    """Smallest eigenpair of the pencil under the deflation constraints.

    Shift-invert Lanczos is tried first; its answer is accepted only if
    ``||N x - mu D x|| / (max(1, |mu|) ||D x||) <= tol`` (residual taken
    modulo the constraint directions). Otherwise block inverse iteration
    with Rayleigh-Ritz runs from the Lanczos vectors. Inside a near multiple
    eigenvalue the vector cannot converge although the value does: if the
    smallest Ritz value is unchanged to 1e-12 over five sweeps and the
    residual is below ``stall_tol`` (default ``sqrt(tol)``) the pair is
    returned with ``stalled=True``.
    """
    n_free = p.n - p.W.shape[1]
    if n_free <= 0:
        raise ValueError("constrained space is empty")
    b = min(block, n_free)
    solve = _BorderedSolver(p, sigma)
    rng = np.random.default_rng(seed)
    if x0 is not None:
        x0 = np.asarray(x0, float).reshape(p.n, -1)[:, :b]

    X = None
    if b < n_free - 1 and p.n > 2 * b + 2:
        try:
            vals, X = _lanczos(p, solve, b, tol, rng)
        except spla.ArpackError:
            X = None
        else:
            res = _residual(p, X[:, 0], vals[0])
            if res <= tol:
                return _pair(p, vals, X, res, 0, False)
    if X is None:
        X = rng.standard_normal((p.n, b))
        if x0 is not None:
            X[:, :x0.shape[1]] = x0

    res = math.inf
    stall_tol = math.sqrt(tol) if stall_tol is None else stall_tol
    history = []
    for it in range(1, max_iter + 1):
        vals, X = _ritz(p, solve(p.D @ p.project(X)))
        res = _residual(p, X[:, 0], vals[0])
        history.append(vals[0])
        steady = len(history) > 5 and all(
            abs(v - vals[0]) <= 1e-12 * abs(vals[0]) for v in history[-6:-1])
        if res <= tol or (steady and res <= stall_tol):
            return _pair(p, vals, X, res, it, res > tol)
    raise NoConvergence(f"residual {res:.3g} > {tol:.3g} after {max_iter} iterations")


def _pair(p, vals, X, res, it, stalled):
    x = X[:, 0] / math.sqrt(X[:, 0] @ (p.D @ X[:, 0]))
    return EigResult(float(vals[0]), x, res, it, vals, stalled)


def dense_generalized_eig(p: Pencil, k: int = 1):
    """Brute-force oracle: dense solve on an explicit basis of ``W.T c = 0``."""
    N, D = p.N.toarray(), p.D.toarray()
    if p.W.shape[1]:
        Z = la.null_space(p.W.T)
        N, D = Z.T @ N @ Z, Z.T @ D @ Z
    else:
        Z = np.eye(p.n)
    vals, vecs = la.eigh((N + N.T) / 2, (D + D.T) / 2)
    return vals[:k], Z @ vecs[:, :k]


# ---------------------------------------------------------------- elliptic solves

def _boundary_values(mesh: Mesh2D, dirichlet_data):
    nodes = mesh.boundary_nodes()
    vals = np.zeros(mesh.n_nodes)
    if callable(dirichlet_data):
        vals[nodes] = mesh.interpolate(dirichlet_data)[nodes]
        return nodes, vals
    for face in FACES:
        g = dirichlet_data.get(face, 0.0)
        idx = mesh.face_nodes(face)
        if callable(g):
            vals[idx] = g(mesh.nodes[idx, 0], mesh.nodes[idx, 1])
        else:
            vals[idx] = g
    return nodes, vals


def solve_elliptic(op, mesh: Mesh2D, dirichlet_data, quad_order: int = 3) -> np.ndarray:
    """Galerkin solution of ``L(u) = 0`` with the given Dirichlet trace.

    ``dirichlet_data`` is a callable ``g(x, y)`` used on the whole boundary, or
    a mapping face -> callable/constant (missing faces are zero; later faces
    in ``lower, upper, axial-start, axial-end`` win at shared corners).
    Returns nodal values on the full mesh.
    """
    K = assemble(mesh, "operator_energy", quad_order, op=op).matrix.tocsr()
    bnd, u = _boundary_values(mesh, dirichlet_data)
    interior = np.setdiff1d(np.arange(mesh.n_nodes), bnd)
    Kii = K[interior][:, interior].tocsc()
    rhs = -(K[interior][:, bnd] @ u[bnd])
    try:
        lu = spla.splu(Kii)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    u[interior] = lu.solve(rhs)
    r = Kii @ u[interior] - rhs
    scale = max(np.linalg.norm(rhs), np.abs(Kii).max() * np.linalg.norm(u[interior]), 1e-300)
    if not np.linalg.norm(r) <= 1e-10 * scale:
        raise SingularSystem(f"relative residual {np.linalg.norm(r) / scale:.3g}")
    return u


# ---------------------------------------------------------------- Korn constants

BCS = ("dirichlet_ends", "periodic")


def korn_space(mesh: Mesh2D, bc: str, deflate=("v",)) -> ConstrainedSpace:
    if bc == "dirichlet_ends":
        bcs = [Dirichlet(AXIAL_FACES, ("u",))]
    elif bc == "periodic":
        bcs = [PeriodicAxial(("u",))]
    else:
        raise ValueError(f"unknown bc {bc!r}; expected one of {BCS}")
    return constrain(mesh, 2, bcs + [DeflateConstants(tuple(deflate))])


@dataclass
class KornSystem:
    """Reduced strain, gradient and u-mass matrices on a constrained space."""

    mesh: Mesh2D
    space: ConstrainedSpace
    S: sp.csr_matrix
    G: sp.csr_matrix
    Mu: sp.csr_matrix

    @classmethod
    def build(cls, d: ThinDomain2D, nx: int, ny: int, bc: str, deflate=("v",), quad_order: int = 3):
        mesh = build_mesh(d, nx, ny)
        space = korn_space(mesh, bc, deflate)
        S = space.reduce(assemble(mesh, "strain", quad_order))
        G = space.reduce(assemble(mesh, "grad_vector", quad_order))
        Mu = space.reduce(assemble(mesh, "mass_u_component", quad_order))
        return cls(mesh, space, S, G, Mu)

    def norms(self, c) -> dict:
        """Squared norms ``||grad U||^2, ||e(U)||^2, ||u||^2`` of a reduced vector."""
        return {"grad": float(c @ (self.G @ c)), "strain": float(c @ (self.S @ c)),
                "u": float(c @ (self.Mu @ c))}


@dataclass
class KornResult:
    K: float
    mu: float
    residual: float
    iterations: int
    field: np.ndarray
    friedrichs: float
    nx: int
    ny: int
    ndof: int
    bc: str


def korn_first_constant(d: ThinDomain2D, nx: int, ny: int, bc: str = "dirichlet_ends",
                        tol: float = 1e-10, quad_order: int = 3, oracle: bool = False) -> KornResult:
    """Optimal constant in ``||grad U||^2 <= K ||e(U)||^2`` on the FEM space.

    ``K = 1/mu_min`` for the pencil (strain, grad_vector). Both shared kernel
    modes are removed by mean-zero deflation: constant ``v`` with ``u = 0`` at
    the ends, constants ``(u, v)`` with periodic ``u``.
    """
    deflate = ("v",) if bc == "dirichlet_ends" else ("u", "v")
    ks = KornSystem.build(d, nx, ny, bc, deflate, quad_order)
    p = Pencil(ks.S, ks.G, ks.space.W)
    if oracle:
        vals, vecs = dense_generalized_eig(p)
        res = EigResult(float(vals[0]), vecs[:, 0], _residual(p, vecs[:, 0], vals[0]), 0)
    else:
        res = smallest_generalized_eig(p, tol)
    c = res.vector
    nrm = ks.norms(c)
    return KornResult(1.0 / res.value, res.value, res.residual, res.iterations,
                      ks.space.expand(c), nrm["u"] / nrm["grad"], nx, ny, p.n - p.W.shape[1], bc)


@dataclass
class StrongRatioResult:
    R: float
    t: float
    field: np.ndarray
    trace: list
    h: float
    residual: float
    probe_ratio: float
    n_solves: int


def field_ratio(ks: KornSystem, c, h: float, tol: float = 1e-10) -> float:
    """``||grad U||^2 / ((1/h)||u|| ||e(U)|| + ||e(U)||^2)`` for a reduced vector.

    Fields outside the deflated space or with zero denominator are rejected.
    """
    c = np.asarray(c, float)
    W = ks.space.W
    if W.shape[1] and np.any(np.abs(W.T @ c) > tol * np.linalg.norm(W, axis=0) * max(np.linalg.norm(c), 1e-300)):
        raise ValueError("field is not in the deflated space")
    nrm = ks.norms(c)
    den = math.sqrt(nrm["u"] * nrm["strain"]) / h + nrm["strain"]
    if not den > 0:
        raise ValueError("zero denominator: field has no strain")
    return nrm["grad"] / den


def strong_ratio_sup(d: ThinDomain2D, nx: int, ny: int, bc: str = "dirichlet_ends",
                     h: float | None = None, *, grid: int = 33, span=(-8.0, 8.0),
                     s_tol: float = 1e-4, tol: float = 1e-8, quad_order: int = 3,
                     peak_window: float = 0.25, max_ascent: int = 60,
                     system: KornSystem | None = None) -> StrongRatioResult:
    """Supremum of ``||grad U||^2 / ((1/h)||u|| ||e|| + ||e||^2)``.

    Uses ``||u|| ||e|| = min_t (t ||u||^2 + ||e||^2 / t) / 2``, so the
    supremum is ``max_t F(t)`` with
    ``F(t) = lambda_max(grad, (t/2h) M_u + (1/(2ht) + 1) S)``.

    ``F`` is the upper envelope of many modes and has several narrow peaks of
    similar height, so a coarse scan alone can step over the best one. After
    the grid scan over ``s = log10 t``, every grid point within
    ``peak_window`` (relative) of the best value starts a fixed-point ascent
    ``t <- ||e(U)|| / ||u||`` on the top eigenfield ``U``; this is the best
    ``t`` for ``U``, so ``F`` never decreases along the ascent. The winner is
    polished by golden-section search on a small bracket.

    The eigen tolerance is looser than for Korn constants: at extreme ``t``
    the scaled residual bottoms out near 1e-10 from conditioning, while the
    Rayleigh value (all the scan uses) is accurate to about its square.
    """
    h = d.h if h is None else h
    ks = system or KornSystem.build(d, nx, ny, bc, ("u", "v") if bc == "periodic" else ("v",),
                                    quad_order)
    W = ks.space.W
    cache: dict = {}
    state = {"x0": None, "solves": 0}

    def solve_at(s):
        if s not in cache:
            t = 10.0**s
            N = (t / (2 * h)) * ks.Mu + (1 / (2 * h * t) + 1) * ks.S
            r = smallest_generalized_eig(Pencil(N.tocsr(), ks.G, W), tol, x0=state["x0"])
            state["x0"] = r.vector
            state["solves"] += 1
            cache[s] = (1.0 / r.value, r)
        return cache[s]

    def lam(s):
        return solve_at(s)[0]

    def ascend(s):
        val, r = solve_at(s)
        for _ in range(max_ascent):
            nrm = ks.norms(r.vector)
            s_new = 0.5 * math.log10(nrm["strain"] / nrm["u"])
            s_new = min(max(s_new, span[0]), span[1])
            if abs(s_new - s) <= s_tol:
                break
            new_val, new_r = solve_at(s_new)
            if new_val <= val:
                break
            s, val, r = s_new, new_val, new_r
        return s

    ss = np.linspace(span[0], span[1], grid)
    vals = np.array([lam(float(s)) for s in ss])
    starts = [float(s) for s, v in zip(ss, vals) if v >= (1 - peak_window) * vals.max()]
    ends = [ascend(s) for s in starts]
    s_top = max(ends, key=lam)
    width = ss[1] - ss[0]
    golden_section_max(lam, s_top - width / 8, s_top + width / 8, tol=s_tol)
    s_best = max(cache, key=lambda s: cache[s][0])
    R, res = cache[s_best]
    trace = sorted((10.0**s, v[0]) for s, v in cache.items())
    probe = field_ratio(ks, res.vector, h)
    return StrongRatioResult(R, 10.0**s_best, ks.space.expand(res.vector), trace, h,
                             res.residual, probe, state["solves"])
