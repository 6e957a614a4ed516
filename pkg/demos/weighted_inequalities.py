"""Randomized checks of the explicit-constant weighted inequalities.

Each case draws a field, a domain and an operator from a seeded generator;
a report records both sides, the constants and the quadrature status.

Run: python demos/weighted_inequalities.py
"""
from collections import Counter

from kornlab.verify import hardy_suite, periodic_La_suite, weighted_gradient_suite

for name, reports in [
    ("one-dimensional Hardy-type bound", hardy_suite(300, seed=1)),
    ("weighted gradient bound", weighted_gradient_suite(10, seed=1)),
    ("variable-coefficient bound, periodic", periodic_La_suite(5, seed=1)),
]:
    verdicts = Counter(r.verdict for r in reports)
    tightest = max(r.lhs / r.rhs for r in reports if r.rhs > 0)
    print(f"{name}: {dict(verdicts)}; largest lhs/rhs = {tightest:.3f}")
