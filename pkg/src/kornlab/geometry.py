"""Profiles, thin curved strips and the distance to a boundary portion.

A thin domain is ``{(x, y) : 0 < y < l, phi1(y) < x < phi2(y)}``; ``x`` is the
thin direction and ``y`` runs along the axis. Profiles are closed-form so that
their first and second derivatives are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar

import numpy as np
import shapely

from ._optim import golden_section_max
from .analytic import Jet
from .errors import EmptySelector, NonPositiveThickness

FACES = ("lower", "upper", "axial-start", "axial-end")


class Profile:
    """Base class for closed-form profile functions ``p(y)``."""

    kind: ClassVar[str] = ""

    def eval(self, y):
        """Return ``(p(y), p'(y), p''(y))``."""
        raise NotImplementedError

    def value(self, y):
        """``p(y)`` alone."""
        return self.eval(y)[0]

    def __call__(self, y):
        return self.value(y)

    def jet(self, y: Jet) -> Jet:
        return y.chain(*self.eval(y.v))

    def is_periodic_compatible(self, l: float, tol: float = 1e-12) -> bool:
        v0, d0, _ = self.eval(0.0)
        v1, d1, _ = self.eval(l)
        return abs(v0 - v1) <= tol and abs(d0 - d1) <= tol

    def to_dict(self) -> dict:
        raise NotImplementedError

    def derivative(self) -> "Profile":
        """The derivative ``p'`` as a profile of the same closed-form kind."""
        raise NotImplementedError

    def __add__(self, other: "Profile") -> "Profile":
        return Sum((self, other))


@dataclass(frozen=True)
class Constant(Profile):
    c: float
    kind: ClassVar[str] = "constant"

    def eval(self, y):
        y = np.asarray(y, float)
        z = np.zeros_like(y)
        return z + self.c, z, z

    def to_dict(self):
        return {"type": "constant", "c": self.c}

    def derivative(self):
        return Constant(0.0)


@dataclass(frozen=True)
class Affine(Profile):
    c0: float
    c1: float
    kind: ClassVar[str] = "affine"

    def eval(self, y):
        y = np.asarray(y, float)
        z = np.zeros_like(y)
        return self.c0 + self.c1 * y, z + self.c1, z

    def to_dict(self):
        return {"type": "affine", "c0": self.c0, "c1": self.c1}

    def derivative(self):
        return Constant(self.c1)


@dataclass(frozen=True)
class Cosine(Profile):
    """``c0 + amp * cos(freq * y + phase)``."""

    c0: float
    amp: float
    freq: float
    phase: float = 0.0
    kind: ClassVar[str] = "cosine"

    def eval(self, y):
        arg = self.freq * np.asarray(y, float) + self.phase
        c, s = np.cos(arg), np.sin(arg)
        return (self.c0 + self.amp * c, -self.amp * self.freq * s,
                -self.amp * self.freq**2 * c)

    def value(self, y):
        return self.c0 + self.amp * np.cos(self.freq * np.asarray(y, float) + self.phase)

    def to_dict(self):
        return {"type": "cosine", "c0": self.c0, "amp": self.amp,
                "freq": self.freq, "phase": self.phase}

    def derivative(self):
        # -A w sin(t) = A w cos(t + pi/2)
        return Cosine(0.0, self.amp * self.freq, self.freq, self.phase + np.pi / 2)


@dataclass(frozen=True)
class Polynomial(Profile):
    """``sum(coefficients[k] * y**k)``."""

    coefficients: tuple
    kind: ClassVar[str] = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def eval(self, y):
        p = np.polynomial.Polynomial(self.coefficients)
        y = np.asarray(y, float)
        return p(y), p.deriv(1)(y), p.deriv(2)(y)

    def to_dict(self):
        return {"type": "polynomial", "coefficients": list(self.coefficients)}

    def derivative(self):
        d = np.polynomial.Polynomial(self.coefficients).deriv().coef
        return Polynomial(tuple(d))


@dataclass(frozen=True)
class Sum(Profile):
    """Sum of profiles, e.g. a sheared line plus a cosine cap."""

    terms: tuple
    kind: ClassVar[str] = "sum"

    def eval(self, y):
        parts = [t.eval(y) for t in self.terms]
        return tuple(sum(p[k] for p in parts) for k in range(3))

    def value(self, y):
        return sum(t.value(y) for t in self.terms)

    def to_dict(self):
        return {"type": "sum", "terms": [t.to_dict() for t in self.terms]}

    def derivative(self):
        return Sum(tuple(t.derivative() for t in self.terms))


def eval_profile(p: Profile, y):
    """Value, first and second derivative of ``p`` at ``y``."""
    return p.eval(y)


def profile_from_dict(d: dict) -> Profile:
    kind = d["type"]
    if kind == "constant":
        return Constant(float(d["c"]))
    if kind == "affine":
        return Affine(float(d["c0"]), float(d["c1"]))
    if kind == "cosine":
        return Cosine(float(d["c0"]), float(d["amp"]), float(d["freq"]), float(d.get("phase", 0.0)))
    if kind == "polynomial":
        return Polynomial(tuple(d["coefficients"]))
    if kind == "sum":
        return Sum(tuple(profile_from_dict(t) for t in d["terms"]))
    raise ValueError(f"unknown profile type {kind!r}")


def sup_on_interval(fun, l: float, n_samples: int = 256) -> float:
    """Maximum of ``fun`` on ``[0, l]``: dense grid then golden refinement."""
    ys = np.linspace(0.0, l, n_samples)
    vals = fun(ys)
    k = int(np.argmax(vals))
    lo, hi = ys[max(k - 1, 0)], ys[min(k + 1, n_samples - 1)]
    _, best = golden_section_max(lambda t: float(fun(t)), lo, hi, tol=1e-12)
    return float(max(best, vals.max()))


@dataclass(frozen=True)
class ThinDomain2D:
    l: float
    phi1: Profile
    phi2: Profile
    n_samples: int = field(default=256, compare=False)

    def __post_init__(self):
        if not self.l > 0:
            raise ValueError("length l must be positive")
        if self.metrics["h"] <= 0:
            raise NonPositiveThickness(f"min(phi2 - phi1) = {self.metrics['h']:.3g} <= 0")

    def thickness(self, y):
        return self.phi2(y) - self.phi1(y)

    @cached_property
    def metrics(self) -> dict:
        return domain_metrics(self, self.n_samples)

    @property
    def h(self) -> float:
        return self.metrics["h"]

    @property
    def H(self) -> float:
        return self.metrics["H"]

    @property
    def area(self) -> float:
        from .quadrature import gauss_legendre
        y, w = gauss_legendre(0.0, self.l, 64, panels=8)
        return float(w @ self.thickness(y))

    def is_periodic_compatible(self, tol: float = 1e-12) -> bool:
        """Hypotheses for axial periodicity: phi1, phi1' and phi2 agree at both ends."""
        v0, d0, _ = self.phi1.eval(0.0)
        v1, d1, _ = self.phi1.eval(self.l)
        w0, w1 = self.phi2(0.0), self.phi2(self.l)
        return abs(v0 - v1) <= tol and abs(d0 - d1) <= tol and abs(w0 - w1) <= tol

    def to_dict(self) -> dict:
        return {"l": self.l, "phi1": self.phi1.to_dict(), "phi2": self.phi2.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ThinDomain2D":
        return cls(float(d["l"]), profile_from_dict(d["phi1"]), profile_from_dict(d["phi2"]))

    def face_polyline(self, face: str, resolution: int) -> np.ndarray:
        """Polyline vertices (``resolution`` segments) of one boundary face."""
        if face in ("lower", "upper"):
            y = np.linspace(0.0, self.l, resolution + 1)
            p = self.phi1 if face == "lower" else self.phi2
            return np.column_stack([p(y), y])
        y = 0.0 if face == "axial-start" else self.l
        a, b = float(self.phi1(y)), float(self.phi2(y))
        t = np.linspace(0.0, 1.0, resolution + 1)
        return np.column_stack([a + t * (b - a), np.full_like(t, y)])


def rectangle(h: float, l: float = 1.0) -> ThinDomain2D:
    return ThinDomain2D(l, Constant(0.0), Constant(h))


def domain_metrics(d: ThinDomain2D, n_samples: int = 256) -> dict:
    """Thickness extrema and profile slope/curvature bounds.

    ``H`` is the supremum of the thickness, so ``m = H/h >= 1``.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be >= 64")
    thick = lambda y: d.phi2(y) - d.phi1(y)
    h = -sup_on_interval(lambda y: -thick(y), d.l, n_samples)
    H = sup_on_interval(thick, d.l, n_samples)
    rho1 = sup_on_interval(lambda y: np.abs(d.phi1.eval(y)[1]), d.l, n_samples)
    rho2 = sup_on_interval(lambda y: np.abs(d.phi2.eval(y)[1]), d.l, n_samples)
    rho1p = sup_on_interval(lambda y: np.abs(d.phi1.eval(y)[2]), d.l, n_samples)
    m = H / h if h > 0 else np.inf
    return {"h": h, "H": H, "m": m, "rho1": rho1, "rho2": rho2, "rho1_prime": rho1p}


@dataclass(frozen=True)
class BoundarySelector:
    """A set of boundary faces (Gamma_1); the remaining faces form Gamma_2."""

    faces: frozenset

    def __init__(self, faces):
        faces = frozenset(faces)
        bad = faces - set(FACES)
        if bad:
            raise ValueError(f"unknown faces {sorted(bad)}")
        object.__setattr__(self, "faces", faces)

    @property
    def complement(self) -> "BoundarySelector":
        return BoundarySelector(set(FACES) - self.faces)

    def __contains__(self, face):
        return face in self.faces

    def __iter__(self):
        return iter(f for f in FACES if f in self.faces)

    def __len__(self):
        return len(self.faces)

    def to_list(self):
        return list(self)


PROFILE_FACES = BoundarySelector({"lower", "upper"})
AXIAL_FACES = BoundarySelector({"axial-start", "axial-end"})


class DistanceFunction:
    """``delta(p) = dist(p, Gamma_1)``.

    ``method="polyline"`` measures against the polyline of the selected faces:
    straight faces exactly, curved profile faces by ``resolution`` chords.
    ``method="projection"`` is exact for closed-form profiles: a local
    candidate scan followed by safeguarded Newton steps on the squared
    distance ``(x - p(s))^2 + (y - s)^2``.
    """

    def __init__(self, d: ThinDomain2D, sel: BoundarySelector, resolution: int = 1024,
                 method: str = "polyline"):
        if len(sel) == 0:
            raise EmptySelector("Gamma_1 is empty")
        if resolution < 128:
            raise ValueError("resolution must be >= 128")
        if method not in ("polyline", "projection"):
            raise ValueError("method must be 'polyline' or 'projection'")
        self.domain, self.selector, self.resolution, self.method = d, sel, resolution, method
        lines, self._curves, self._segments = [], [], []
        for face in sel:
            prof = d.phi1 if face == "lower" else d.phi2
            straight = face.startswith("axial") or prof.kind in ("constant", "affine")
            lines.append(d.face_polyline(face, 1 if straight else resolution))
            if straight:
                self._segments.append(d.face_polyline(face, 1))
            else:
                self._curves.append(prof)
        self._geom = shapely.multilinestrings([shapely.linestrings(ln) for ln in lines])

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        if self.method == "polyline":
            pts = shapely.points(x.ravel(), y.ravel())
            return shapely.distance(self._geom, pts).reshape(x.shape)
        return self._parts(x, y)[0].min(axis=0)

    def _parts(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        px, py = x.ravel(), y.ravel()
        parts = [_segment_distance(px, py, seg[0], seg[1], foot=True) for seg in self._segments]
        parts += [_curve_distance(px, py, prof, self.domain.l, 24, foot=True)
                  for prof in self._curves]
        dist = np.stack([p[0] for p in parts]).reshape((len(parts),) + x.shape)
        end = np.stack([p[1] for p in parts]).reshape(dist.shape)
        return dist, end

    def regions(self, x, y) -> np.ndarray:
        """Integer label of the smooth piece of ``delta`` containing each point.

        The label combines the nearest face, whether the nearest point of
        that face is interior or one of its ends and, for curved faces, on
        which side of ``y`` the nearest point lies; ``delta`` is
        smooth inside each region and only Lipschitz across region borders
        (projection method).
        """
        dist, end = self._parts(x, y)
        k = np.argmin(dist, axis=0)
        return 6 * k + np.take_along_axis(end, k[None], axis=0)[0]


def _end_state(t, lo, hi):
    return np.where(t <= lo, 1, np.where(t >= hi, 2, 0))


def _segment_distance(px, py, a, b, foot=False):
    d = b - a
    t = np.clip(((px - a[0]) * d[0] + (py - a[1]) * d[1]) / (d @ d), 0.0, 1.0)
    dist = np.hypot(px - a[0] - t * d[0], py - a[1] - t * d[1])
    return (dist, _end_state(t, 0.0, 1.0)) if foot else dist


def _curve_distance(px, py, prof: Profile, l: float, samples: int, chunk: int = 4096, foot=False):
    """Distance from points to the curve ``x = p(s), 0 <= s <= l``; with
    ``foot`` also whether the nearest point is an end of the curve.

    The foot of a point lies within ``r = |x - p(y)|`` of its own ``y`` (for
    ``y`` inside ``[0, l]``), so ``samples`` candidates are scanned in that
    window before safeguarded Newton steps on the squared distance.
    """
    out = np.empty(px.shape)
    state = np.zeros(px.shape, dtype=int)
    u = np.linspace(-1.0, 1.0, samples)
    for k in range(0, px.size, chunk):
        x, y = px[k:k + chunk], py[k:k + chunk]
        yc = np.clip(y, 0.0, l)
        r = np.abs(x - prof(yc)) + np.abs(y - yc)
        lo_w, hi_w = np.maximum(y - r, 0.0), np.minimum(y + r, l)
        S = np.clip(0.5 * (lo_w + hi_w)[:, None] + 0.5 * (hi_w - lo_w)[:, None] * u[None, :], 0.0, l)
        g = (x[:, None] - prof(S)) ** 2 + (y[:, None] - S) ** 2
        i = np.argmin(g, axis=1)
        rows = np.arange(len(i))
        best, s0 = g[rows, i], S[rows, i]
        step = (hi_w - lo_w) / (samples - 1)
        lo, hi = np.maximum(s0 - step, 0.0), np.minimum(s0 + step, l)
        s = s0
        for _ in range(8):
            v, d1, d2 = prof.eval(s)
            gp = -(x - v) * d1 - (y - s)
            gpp = d1 * d1 - (x - v) * d2 + 1.0
            s_new = np.clip(np.where(gpp > 0, s - gp / np.where(gpp > 0, gpp, 1.0), s), lo, hi)
            done = np.all(np.abs(s_new - s) <= 1e-15 * max(l, 1.0))
            s = s_new
            if done:
                break
        g_new = (x - prof(s)) ** 2 + (y - s) ** 2
        s = np.where(g_new <= best, s, s0)
        out[k:k + chunk] = np.sqrt(np.minimum(g_new, best))
        # which side of y the foot lies on separates the two branches of a
        # concave face; it flips elsewhere only on lines through extrema
        state[k:k + chunk] = _end_state(s, 0.0, l) + 3 * (s > y)
    return (out, state) if foot else out


def distance_to_gamma1(d: ThinDomain2D, sel: BoundarySelector, pt, resolution: int = 1024) -> float:
    return float(DistanceFunction(d, sel, resolution)(pt[0], pt[1]))
