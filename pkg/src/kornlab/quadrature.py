"""Composite Gauss-Legendre rules on intervals, thin domains and their boundary."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _reference_rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def gauss_legendre(a: float, b: float, n: int, panels: int = 1):
    """Composite ``n``-point Gauss rule on ``[a, b]`` split into equal panels."""
    x, w = _reference_rule(n)
    edges = np.linspace(a, b, panels + 1)
    width = np.diff(edges)
    pts = (edges[:-1, None] + width[:, None] * x[None, :]).ravel()
    wts = (width[:, None] * w[None, :]).ravel()
    return pts, wts


@dataclass
class DomainRule:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.w, np.ravel(values)))


def domain_rule(d, n: int, panels=(4, 16)) -> DomainRule:
    """Tensor Gauss rule on the strip through ``x = phi1 + xi (phi2 - phi1)``.

    The map has Jacobian ``phi2(y) - phi1(y)``.
    """
    xi, wxi = gauss_legendre(0.0, 1.0, n, panels[0])
    y, wy = gauss_legendre(0.0, d.l, n, panels[1])
    lo, hi = d.phi1(y), d.phi2(y)
    X = lo[None, :] + xi[:, None] * (hi - lo)[None, :]
    Y = np.broadcast_to(y[None, :], X.shape)
    W = wxi[:, None] * (wy * (hi - lo))[None, :]
    return DomainRule(X.ravel(), np.ascontiguousarray(Y).ravel(), W.ravel())


@dataclass
class FaceRule:
    face: str
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    nx: np.ndarray
    ny: np.ndarray


def boundary_rules(d, n: int, panels: int = 16) -> list:
    """One rule per face with outward unit normals and arclength weights."""
    rules = []
    y, wy = gauss_legendre(0.0, d.l, n, panels)
    for face, prof, sign in (("lower", d.phi1, -1.0), ("upper", d.phi2, 1.0)):
        v, dv, _ = prof.eval(y)
        s = np.sqrt(1 + dv**2)
        rules.append(FaceRule(face, v, y, wy * s, sign / s, -sign * dv / s))
    t, wt = gauss_legendre(0.0, 1.0, n, max(panels // 4, 1))
    for face, yy, sign in (("axial-start", 0.0, -1.0), ("axial-end", d.l, 1.0)):
        a, b = float(d.phi1(yy)), float(d.phi2(yy))
        x = a + t * (b - a)
        one = np.ones_like(x)
        rules.append(FaceRule(face, x, yy * one, wt * (b - a), 0 * one, sign * one))
    return rules


def _runs(labels) -> tuple:
    """Run-length signature of a label sequence, e.g. ``[0, 0, 2, 2, 1] -> (0, 2, 1)``."""
    keep = np.concatenate(([True], labels[1:] != labels[:-1]))
    return tuple(labels[keep].tolist())


def _line_samples(samples: int) -> np.ndarray:
    # switch curves crowd together at corners, so sample geometrically there
    tail = np.geomspace(1e-6, 0.5 / (samples - 1), 12)
    return np.unique(np.concatenate((np.linspace(0.0, 1.0, samples), tail, 1.0 - tail)))


def _line_switches(d, y, regions, xi_s, bisect: int):
    """Label switches along the lines ``y = const`` in the strip coordinate.

    Returns ``(rows, points, right_labels, first_labels)`` with switches
    sorted by line and position. A bracket of sample points may hide regions
    narrower than the sample spacing, so after locating a switch the search
    continues until the label at the far sample is reached.
    """
    lo, hi = d.phi1(y), d.phi2(y)
    t = hi - lo
    lab = regions(lo[:, None] + xi_s[None, :] * t[:, None], np.broadcast_to(y[:, None], (len(y), xi_s.size)))
    jj, kk = np.nonzero(lab[:, 1:] != lab[:, :-1])
    a, b, target, ref = xi_s[kk], xi_s[kk + 1], lab[jj, kk + 1], lab[jj, kk]
    rows, points, rights = [], [], []
    for _ in range(8):
        if jj.size == 0:
            break
        lo_, hi_ = a.copy(), b.copy()
        for _ in range(bisect):
            m = 0.5 * (lo_ + hi_)
            left = regions(lo[jj] + m * t[jj], y[jj]) == ref
            lo_, hi_ = np.where(left, m, lo_), np.where(left, hi_, m)
        right = regions(lo[jj] + hi_ * t[jj], y[jj])
        rows.append(jj)
        points.append(0.5 * (lo_ + hi_))
        rights.append(right)
        more = (right != target) & (b - hi_ > 1e-13)
        jj, a, b, target, ref = jj[more], hi_[more], b[more], target[more], right[more]
    if not rows:
        return np.zeros(0, int), np.zeros(0), np.zeros(0, int), lab[:, 0]
    jj, sw, rt = np.concatenate(rows), np.concatenate(points), np.concatenate(rights)
    order = np.lexsort((sw, jj))
    return jj[order], sw[order], rt[order], lab[:, 0]


def _signatures(y, regions, d, xi_s, bisect) -> list:
    jj, _, rt, first = _line_switches(d, np.asarray(y, float), regions, xi_s, bisect)
    split = np.split(rt, np.cumsum(np.bincount(jj, minlength=len(first)))[:-1])
    return [(int(f),) + tuple(r.tolist()) for f, r in zip(first, split)]


def kink_edges(d, panels: int, regions, samples: int = 33, bisect: int = 14) -> np.ndarray:
    """Panel edges in ``y``: ``panels`` uniform panels plus every ``y`` where
    the sequence of ``regions`` labels across the strip changes (a switch
    curve ends, meets another or runs along ``y = const``)."""
    xi_s = _line_samples(samples)
    edges = list(np.linspace(0.0, d.l, panels + 1))
    yf = np.linspace(0.0, d.l, max(8 * panels, 128) + 1)
    # signatures only need switch order, not precise switch positions
    sig = _signatures(yf, regions, d, xi_s, 12)
    jumps = [j for j in range(len(yf) - 1) if sig[j] != sig[j + 1]]
    if jumps:
        a, b = yf[jumps], yf[np.array(jumps) + 1]
        ref = [sig[j] for j in jumps]
        for _ in range(bisect):
            # an edge off by eps costs O(eps^2) at a kink
            m = 0.5 * (a + b)
            same = np.array([s == r for s, r in zip(_signatures(m, regions, d, xi_s, 12), ref)])
            a, b = np.where(same, m, a), np.where(same, b, m)
        edges.extend(0.5 * (a + b))
    base = np.linspace(0.0, d.l, panels + 1)
    out = list(base)
    for e in sorted(edges[panels + 1:]):
        if np.min(np.abs(np.asarray(out) - e)) > 1e-7 * d.l:
            out.append(e)
    return np.sort(out)


def kinked_domain_rule(d, n: int, panels, regions, samples: int = 33, bisect: int = 24,
                       y_edges=None) -> DomainRule:
    """Tensor Gauss rule for integrands that are smooth inside the regions
    labelled by ``regions(x, y)`` (an integer array) but not across them.

    Along each quadrature line ``y = const`` the label switches are located
    by bisection and become panel edges in ``xi``; the ``y`` panels come from
    :func:`kink_edges` (pass ``y_edges`` to reuse them across orders).
    """
    edges = kink_edges(d, panels[1], regions, samples) if y_edges is None else y_edges
    x_ref, w_ref = _reference_rule(n)
    width = np.diff(edges)
    y = (edges[:-1, None] + width[:, None] * x_ref[None, :]).ravel()
    wy = (width[:, None] * w_ref[None, :]).ravel()
    X, W = line_rules(d, y, n, panels[0], regions, samples, bisect)
    W = W * wy[:, None]
    Y = np.broadcast_to(y[:, None], X.shape)
    return DomainRule(X.ravel(), np.ascontiguousarray(Y).ravel(), W.ravel())


def line_rules(d, y, n: int, panels: int, regions, samples: int = 33, bisect: int = 24):
    """Gauss rules across the strip on each line ``y = const``, with panel
    edges at the label switches of ``regions``; returns ``(X, W)`` with one
    row per line and weights including the thickness."""
    x_ref, w_ref = _reference_rule(n)
    lo, hi = d.phi1(y), d.phi2(y)
    t = hi - lo
    jj, sw, _, _ = _line_switches(d, y, regions, _line_samples(samples), bisect)
    counts = np.bincount(jj, minlength=len(y))
    base = np.linspace(0.0, 1.0, panels + 1)
    cols = base.size + (counts.max() if counts.size else 0)
    S = np.ones((len(y), cols))
    S[:, :base.size] = base
    pos = base.size + (np.arange(len(jj)) - np.concatenate(([0], np.cumsum(counts)))[jj])
    S[jj, pos] = sw
    S.sort(axis=1)
    seg = np.diff(S, axis=1)
    XI = S[:, :-1, None] + seg[:, :, None] * x_ref[None, None, :]
    W = seg[:, :, None] * w_ref[None, None, :] * t[:, None, None]
    X = lo[:, None, None] + XI * t[:, None, None]
    return X.reshape(len(y), -1), W.reshape(len(y), -1)
