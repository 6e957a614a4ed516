"""The strong second Korn ratio stays bounded as the domain thins, and the
bending-type field nearly attains it.

R*(h) is the supremum over admissible displacements of
||grad U||^2 / ((1/h) ||u|| ||e(U)|| + ||e(U)||^2).

Run: python demos/strong_ratio_and_ansatz.py   (under a minute)
"""
from kornlab.ansatz import cosh_sine_field, shear_ansatz
from kornlab.verify import fit_scaling, verify_strong_second_korn

hs = (0.2, 0.1, 0.05)
rep = verify_strong_second_korn("rect", hs)
for row in rep.rows:
    print(f"h = {row['h']:<5} R* = {row['ratio']:.4f} at t = {row['t_star']:.3g}")
print(f"R* exponent {rep.exponent:.3f}, verdict {rep.verdict}")

kirchhoff = [(h, shear_ansatz(h=h, alpha=0.5).ratio()) for h in hs]
print("Kirchhoff shear field ratios:", ", ".join(f"{r:.4f}" for _, r in kirchhoff),
      f"(exponent {fit_scaling(kirchhoff)[0]:.3f})")

cosh_sine = [(h, cosh_sine_field(h).ratio()) for h in hs]
print("cosh-sine harmonic ratios:  ", ", ".join(f"{r:.4f}" for _, r in cosh_sine),
      f"(exponent {fit_scaling(cosh_sine)[0]:.3f})")
