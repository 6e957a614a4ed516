"""First Korn constant of thin rectangles: K(h) grows like h^-2.

Run: python demos/korn_constant_scaling.py
"""
from kornlab.geometry import rectangle
from kornlab.solve import korn_first_constant
from kornlab.verify import default_mesh, fit_scaling

rows = []
for h in (0.2, 0.1, 0.05, 0.025):
    d = rectangle(h)
    nx, ny = default_mesh(d)
    r = korn_first_constant(d, nx, ny, "dirichlet_ends")
    rows.append((h, r.K))
    print(f"h = {h:<6} mesh {nx}x{ny:<4} K = {r.K:10.3f}  K h^2 = {r.K * h * h:.4f}  residual {r.residual:.1e}")

p, _, r2 = fit_scaling(rows)
print(f"fitted exponent {p:.3f} (r^2 = {r2:.5f})")

# the same constant on the unit square is of order one
print(f"unit square: K = {korn_first_constant(rectangle(1.0), 32, 32).K:.3f}")
