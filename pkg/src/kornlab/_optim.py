"""Scalar golden-section search."""
import math

INVPHI = (math.sqrt(5.0) - 1) / 2


def golden_section_max(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    Stops once the bracket is shorter than ``tol``.
    """
    c, d = b - INVPHI * (b - a), a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)
