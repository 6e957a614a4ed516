import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kornlab.analytic import coord_x, coord_y, constant, cos, polynomial, sin
from kornlab.errors import (
    BadInterval, BoundaryConditionViolated, CutoffMissing, EmptySelector, NonPositiveInput,
)
from kornlab.geometry import AXIAL_FACES, PROFILE_FACES, BoundarySelector, Constant, Cosine, rectangle
from kornlab.operators import VarCoeffOperatorLa, laplacian
from kornlab.verify import (
    InequalityReport, check_boundary_integral, check_hardy, check_shear_constants,
    check_weighted_gradient, check_weighted_gradient_La, fit_scaling, gamma2_cutoff, hardy_suite,
    holds, periodic_La_suite, random_trig_polynomial, shear_constants_suite,
    verify_first_korn_scaling, weighted_gradient_La_suite, weighted_gradient_suite,
)

X, Y = coord_x(), coord_y()


def test_hardy_constant_function():
    r = check_hardy(constant(1.0), 1.0, 2.0, 0.5)
    assert r.lhs == pytest.approx(0.5, abs=1e-14)
    assert r.rhs == pytest.approx(2.0, abs=1e-14)
    assert r.verdict == "holds"


def test_hardy_linear_function():
    r = check_hardy(polynomial([-1.0, 1.0]), 1.0, 2.0, 0.5)
    assert r.lhs == pytest.approx(7 / 24, abs=1e-14)
    assert r.rhs == pytest.approx(3 / 2, abs=1e-14)
    assert r.verdict == "holds"


def test_hardy_bad_interval():
    with pytest.raises(BadInterval):
        check_hardy(constant(1.0), 2.0, 1.0, 0.5)
    with pytest.raises(BadInterval):
        check_hardy(constant(1.0), 1.0, 2.0, 0.0)
    with pytest.raises(BadInterval):
        check_hardy(constant(1.0), 0.0, 1.0, 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 5.0))
def test_hardy_translation_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    f = random_trig_polynomial(rng, 4)
    g = f.__class__(lambda x, y, f=f: f.fn(x - shift, y), "shifted")
    a, b = 0.7, 2.1
    r1 = check_hardy(f, a, b, 0.3)
    r2 = check_hardy(g, a + shift, b + shift, 0.3)
    assert r2.lhs == pytest.approx(r1.lhs, rel=1e-12, abs=1e-14)
    assert r2.rhs == pytest.approx(r1.rhs, rel=1e-12, abs=1e-14)


def test_hardy_suite_small():
    reps = hardy_suite(200, seed=11)
    assert all(r.verdict == "holds" for r in reps)


def test_verdict_rule():
    assert holds(1.0, 1.0)
    assert holds(1.0 + 5e-9, 1.0)
    assert not holds(1.0 + 2e-8, 1.0)
    assert holds(1e-14, 0.0)
    r = InequalityReport("x", 2.0, 1.0, {}, 64)
    assert r.verdict == "violated" and r.margin == -1.0


def test_weighted_gradient_zero_field():
    r = check_weighted_gradient(constant(0.0), laplacian(2), rectangle(0.2), AXIAL_FACES)
    assert r.lhs == 0 and r.rhs == 0 and r.verdict == "holds"


def test_weighted_gradient_unit_square():
    f = sin(math.pi * X) * (1 + Y * Y)
    r = check_weighted_gradient(f, laplacian(2), rectangle(1.0), AXIAL_FACES)
    assert r.converged and r.verdict == "holds"
    assert 0 < r.lhs < r.rhs
    r2 = check_weighted_gradient(f, laplacian(2), rectangle(1.0), AXIAL_FACES, quad_n=20)
    assert r2.lhs == pytest.approx(r.lhs, rel=1e-6)


def test_weighted_gradient_requires_cutoff():
    f = sin(math.pi * Y) + 1.0
    with pytest.raises(CutoffMissing):
        check_weighted_gradient(f, laplacian(2), rectangle(0.2), AXIAL_FACES)


def test_weighted_gradient_suite_small():
    reps = weighted_gradient_suite(8, seed=5)
    assert all(r.verdict == "holds" for r in reps)


def test_la_zero_field():
    La = VarCoeffOperatorLa(Constant(0.0))
    r = check_weighted_gradient_La(constant(0.0), La, rectangle(0.2), AXIAL_FACES)
    assert r.lhs == 0 and r.rhs == 0 and r.verdict == "holds"


def test_la_constant_coefficient():
    d = rectangle(0.2)
    f = gamma2_cutoff(d, AXIAL_FACES) * sin(2 * math.pi * Y) * X
    r = check_weighted_gradient_La(f, VarCoeffOperatorLa(Constant(0.5)), d, AXIAL_FACES)
    assert r.converged and r.verdict == "holds"
    assert abs(r.terms["boundary_term"]) <= 1e-8 * r.terms["boundary_scale"]


def test_la_rejects_nonvanishing_boundary_term():
    d = rectangle(0.2)
    f = 1.0 + X + Y
    with pytest.raises(BoundaryConditionViolated):
        check_weighted_gradient_La(f, VarCoeffOperatorLa(Constant(0.5)), d, AXIAL_FACES)


def test_la_empty_selector():
    with pytest.raises(EmptySelector):
        check_weighted_gradient_La(constant(0.0), VarCoeffOperatorLa(Constant(0.0)), rectangle(0.2),
                                   BoundarySelector(()))


def test_la_suite_small():
    reps = weighted_gradient_La_suite(6, seed=3)
    assert all(r.verdict == "holds" for r in reps)


def test_boundary_integral_vanishes_with_cutoff():
    d = rectangle(0.2)
    f = gamma2_cutoff(d, PROFILE_FACES) * (1 + X * Y)
    La = VarCoeffOperatorLa(Cosine(0.2, 0.3, 2 * math.pi))
    assert abs(check_boundary_integral(f, La, d, PROFILE_FACES)) <= 1e-12


def test_boundary_integral_periodic_cancellation():
    d = rectangle(0.2)
    f = (1 + X) * cos(2 * math.pi * Y) + X * X * sin(4 * math.pi * Y)
    La = VarCoeffOperatorLa(Cosine(0.1, 0.4, 2 * math.pi))
    parts = check_boundary_integral(f, La, d, PROFILE_FACES, per_face=True)
    assert abs(parts["axial-start"]) > 1e-4
    assert parts["axial-start"] == pytest.approx(-parts["axial-end"], abs=1e-10)
    assert abs(parts["total"]) <= 1e-10


def test_boundary_integral_generic_field_nonzero():
    d = rectangle(0.2)
    f = 1.0 + X + Y
    La = VarCoeffOperatorLa(Constant(0.5))
    assert abs(check_boundary_integral(f, La, d, AXIAL_FACES)) > 1e-6
    m = check_boundary_integral(f, La, d, AXIAL_FACES, form="mixed")
    c = check_boundary_integral(f, La, d, AXIAL_FACES, form="conormal")
    assert m != pytest.approx(c)


def test_periodic_suite_small():
    reps = periodic_La_suite(6, seed=2)
    assert all(r.verdict == "holds" for r in reps)
    assert all(abs(r.terms["boundary_term"]) <= 1e-8 * r.terms["boundary_scale"] for r in reps)


def test_counterexample_dumped(tmp_path):
    from kornlab.verify import _dump
    r = InequalityReport("hardy", 2.0, 1.0, {"c": 1.0}, 64, seed=9)
    _dump(r, tmp_path)
    data = json.loads((tmp_path / "hardy_seed9.json").read_text())
    assert data["verdict"] == "violated"


def test_fit_exact_inverse_square():
    h = np.array([0.2, 0.1, 0.05, 0.025])
    p, _, r2 = fit_scaling(list(zip(h, h**-2)))
    assert p == pytest.approx(-2.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_constant():
    p, c, _ = fit_scaling([(0.2, 3.0), (0.1, 3.0), (0.05, 3.0)])
    assert p == pytest.approx(0.0, abs=1e-12)
    assert c == pytest.approx(math.log(3.0))


def test_fit_noisy():
    rng = np.random.default_rng(0)
    h = np.geomspace(0.01, 0.5, 12)
    v = h**-2 * (1 + 0.01 * rng.standard_normal(h.size))
    assert abs(fit_scaling(list(zip(h, v)))[0] + 2) <= 0.05


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_fit_recovers_power_laws(p, C):
    h = [0.2, 0.1, 0.05, 0.025]
    assert fit_scaling([(t, C * t**p) for t in h])[0] == pytest.approx(p, abs=1e-12)


def test_fit_rejects_bad_input():
    with pytest.raises(NonPositiveInput):
        fit_scaling([(0.1, 1.0), (0.2, -1.0), (0.3, 2.0)])
    with pytest.raises(NonPositiveInput):
        fit_scaling([(0.1, 1.0), (0.2, 1.0)])


def test_shear_constants_claims_hold_for_large_b():
    cases = shear_constants_suite(100, seed=1)
    assert all(c["lam_ok"] and c["Lam_ok"] and c["lam_corrected_ok"] for c in cases)


def test_shear_lambda_claim_needs_b_at_least_one():
    r = check_shear_constants([0.1, 0.1], [0.0, 0.5])
    assert not r["lam_ok"]
    assert r["lam_corrected_ok"]


def test_friedrichs_ratio_bounded_across_h():
    rep = verify_first_korn_scaling("rect", (0.2, 0.1, 0.05))
    assert -0.3 <= rep.extra["friedrichs_exponent"] <= 0.3
    assert rep.verdict == "holds"
