import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpwalk import kernel as K
from qpwalk.errors import (
    BranchPointOnUnitCircle,
    ComplexBranchPoint,
    DegenerateKernel,
    DegenerateQuadratic,
    Genus0Walk,
    SingularWalk,
)
from qpwalk.model import validate_spec
from qpwalk.singularity import analyze

from walkgen import ergodic_specs

W1_BOUNDARY = {
    "horizontal": {"1,0": 0.1, "-1,0": 0.2, "0,1": 0.3, "0,0": 0.4},
    "vertical": {"0,1": 0.1, "0,-1": 0.2, "1,0": 0.3, "0,0": 0.4},
    "origin": {"1,0": 0.5, "0,1": 0.5},
}


def with_interior(interior):
    return validate_spec({"interior": interior, **W1_BOUNDARY})


@pytest.fixture(scope="module")
def kp(w1_spec):
    return K.build_polynomials(w1_spec)


def test_w1_polynomials(kp):
    assert list(kp.a) == [0.0, 0.1, 0.0]
    assert kp.b == pytest.approx([0.3, -0.8, 0.1])
    assert list(kp.a1) == [0.0, 0.3, 0.0]
    assert kp.b1 == pytest.approx([0.2, -0.6, 0.1])


def test_w1_branch_points(kp):
    disc = K.discriminant(kp)
    assert disc.degree == 4
    bp = K.branch_points(disc)
    r3 = math.sqrt(3.0)
    # 100 D1 = (x^2 - 8x + 3)^2 - 12 x^2 splits into x^2 - (8 -+ 2 sqrt 3) x + 3
    assert bp.x3 == pytest.approx(2 + r3, abs=1e-9)
    assert bp.x[1] == pytest.approx(3 / (2 + r3), abs=1e-12)
    assert bp.x[3] == pytest.approx(3 * (2 + r3), abs=1e-9)
    assert bp.x[0] == pytest.approx(2 - r3, abs=1e-12)
    assert bp.x == bp.y


def test_w1_branch_values(kp):
    y0, y1 = K.eval_Y(kp, 1.0).real()
    assert y0 == pytest.approx(1.0, abs=1e-14)
    assert y1 == pytest.approx(3.0, abs=1e-14)
    bp = K.branch_points(K.discriminant(kp))
    v = K.eval_Y(kp, bp.x3, branch_limit=True)
    assert v.y0 == v.y1_val
    # at x3 the double root is -b/2a
    assert v.y0 == pytest.approx(-K.polyval(kp.b, bp.x3) / (2 * K.polyval(kp.a, bp.x3)))


def test_quadratic_roots_stable():
    # catastrophic cancellation case: roots 1e-9 and 1e9
    v = K.quadratic_roots(1.0, -(1e9 + 1e-9), 1.0)
    assert v.y0 == pytest.approx(1e-9, rel=1e-12)
    assert v.y1_val == pytest.approx(1e9, rel=1e-12)


def test_quadratic_linear_fallback():
    v = K.quadratic_roots(0.0, 2.0, -1.0)
    assert v.y0 == 0.5 and math.isinf(v.y1_val)
    with pytest.raises(DegenerateQuadratic):
        K.quadratic_roots(0.0, 0.0, 1.0)


def test_complex_branch_values(kp):
    # between x3 and x4 the roots are complex conjugates of equal modulus
    v = K.eval_Y(kp, 5.0)
    assert isinstance(v.y0, complex)
    assert v.y0 == pytest.approx(v.y1_val.conjugate())


def test_transposed_kernel_matches_transposed_spec(w1_spec):
    spec = validate_spec({
        "interior": {"1,0": 0.15, "-1,0": 0.3, "0,1": 0.05, "0,-1": 0.25, "1,1": 0.05, "-1,-1": 0.1, "0,0": 0.1},
        **W1_BOUNDARY,
    })
    a = K.transposed(K.build_polynomials(spec)).as_dict()
    b = K.build_polynomials(spec.transposed()).as_dict()
    for key in a:
        assert a[key] == pytest.approx(b[key]), key


def test_singular_walk_rejected():
    spec = with_interior({"1,1": 0.2, "-1,-1": 0.5, "0,0": 0.3})
    with pytest.raises(SingularWalk) as e:
        analyze(spec)
    assert e.value.exit_code == 3


def test_genus0_infinity():
    spec = with_interior({"-1,-1": 0.25, "-1,1": 0.25, "1,-1": 0.25, "0,0": 0.25})
    with pytest.raises(Genus0Walk):
        analyze(spec)


def _disc_from_roots(roots):
    coef = np.polynomial.polynomial.polyfromroots(roots).real
    return K.Discriminant(d=coef, d_y=coef, degree=len(roots), degree_y=len(roots))


def test_genus0_coincident(kp):
    disc = _disc_from_roots([0.25, 0.5, 3.0, 3.0])
    with pytest.raises(Genus0Walk):
        K.check_nonsingular_genus1(kp, K.branch_points(disc), K.discriminant(kp))


def test_branch_point_on_unit_circle():
    with pytest.raises(BranchPointOnUnitCircle):
        K.branch_points(_disc_from_roots([0.25, 0.5, 1.0, 3.0]))


def test_no_positive_x_steps_is_degenerate():
    spec = with_interior({"-1,-1": 0.25, "-1,0": 0.25, "-1,1": 0.25, "0,0": 0.25})
    with pytest.raises(DegenerateKernel):
        analyze(spec)


def test_genuinely_complex_branch_point():
    # D = (x^2 + 1)(x - 1/2)(x - 1/4) has roots +-i
    with pytest.raises(ComplexBranchPoint):
        K.branch_points(_disc_from_roots([1j, -1j, 0.5, 0.25]))


def test_infinite_branch_point():
    # no (1,*) steps with p10^2 = 4 p11 p1m1 drops D1 to degree 3: x4 is at infinity
    spec = with_interior({"1,0": 0.2, "1,1": 0.1, "1,-1": 0.1, "-1,0": 0.3, "0,-1": 0.2, "0,0": 0.1})
    bp = K.branch_points(K.discriminant(K.build_polynomials(spec)))
    assert math.isinf(bp.x[3])
    assert 1 < bp.x3 < math.inf


@given(ergodic_specs())
@settings(max_examples=100, deadline=None)
def test_explicit_and_expanded_discriminants_agree(spec):
    kp = K.build_polynomials(spec)
    d = K.discriminant(kp)
    np.testing.assert_allclose(d.d, K.expanded_disc(kp.a, kp.b, kp.c), atol=1e-15)
    np.testing.assert_allclose(d.d_y, K.expanded_disc(kp.a_y, kp.b_y, kp.c_y), atol=1e-15)


@given(ergodic_specs())
@settings(max_examples=100, deadline=None)
def test_branch_point_ordering(spec):
    kp = K.build_polynomials(spec)
    bp = K.branch_points(K.discriminant(kp))
    for pts in (bp.x, bp.y):
        x1, x2, x3, x4 = pts
        assert abs(x1) <= abs(x2) < 1 < x3 <= abs(x4)
        assert 0 < x2


@given(ergodic_specs())
@settings(max_examples=100, deadline=None)
def test_Y0_at_one(spec):
    kp = K.build_polynomials(spec)
    a1, c1 = K.polyval(kp.a, 1.0), K.polyval(kp.c, 1.0)
    assert K.Y0(kp, 1.0) == pytest.approx(min(1.0, c1 / a1), abs=1e-12)
    assert K.X0(kp, 1.0) == pytest.approx(min(1.0, K.polyval(kp.c_y, 1.0) / K.polyval(kp.a_y, 1.0)), abs=1e-12)


@given(ergodic_specs(), st.floats(min_value=0.05, max_value=0.95))
@settings(max_examples=60, deadline=None)
def test_branch_slope_against_finite_difference(spec, t):
    kp = K.build_polynomials(spec)
    bp = K.branch_points(K.discriminant(kp))
    x = bp.x[1] + t * (bp.x3 - bp.x[1])
    hstep = 1e-6 * min(x - bp.x[1], bp.x3 - x)
    fd = (K.Y0(kp, x + hstep) - K.Y0(kp, x - hstep)) / (2 * hstep)
    assert K.dY_dx(kp, x, K.Y0(kp, x)) == pytest.approx(fd, rel=1e-5, abs=1e-8)


@given(ergodic_specs(), st.floats(min_value=0.05, max_value=0.95))
@settings(max_examples=60, deadline=None)
def test_branch_values_solve_kernel(spec, t):
    kp = K.build_polynomials(spec)
    bp = K.branch_points(K.discriminant(kp))
    x = bp.x[1] + t * (bp.x3 - bp.x[1])
    y0, y1 = K.eval_Y(kp, x).real()
    scale = abs(K.polyval(kp.a, x)) * y1 * y1 + abs(K.polyval(kp.b, x)) * y1 + abs(K.polyval(kp.c, x))
    assert abs(kp.h(x, y0)) <= 1e-12 * scale
    assert abs(kp.h(x, y1)) <= 1e-12 * scale
    assert y0 <= y1
    # the two descriptions of the kernel agree
    assert kp.h(x, y0) == pytest.approx(kp.h_from_y(x, y0), abs=1e-13)
