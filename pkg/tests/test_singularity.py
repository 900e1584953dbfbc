import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpwalk import kernel as K
from qpwalk.example2 import LABEL_BY_SIGN, indicator
from qpwalk.model import ShapeClass, load_model, validate_spec
from qpwalk.singularity import analyze, classify, degrade, f0, f1_tilde, sextic

from conftest import model_path
from walkgen import ergodic_specs

INF = math.inf
PLAIN = ShapeClass(False, False, False)
CORPUS = Path(model_path("W1")).parent / "example2"


# --- independent oracle for x* and x~1: numpy.roots plus bisection -----------

def _small_root(coeffs_desc):
    r = np.roots(coeffs_desc)
    return min(r, key=abs).real


def _big_root(coeffs_desc):
    r = np.roots(coeffs_desc)
    return max(r, key=abs).real


def _w1_h1_along_Y0(x):
    # interior: a = 0.1 x, b = 0.1 x^2 - 0.8 x + 0.3, c = 0.3 x; h1 = 0.3 x y + 0.1 x^2 - 0.6 x + 0.2
    y = _small_root([0.1 * x, 0.1 * x * x - 0.8 * x + 0.3, 0.3 * x])
    return 0.3 * x * y + 0.1 * x * x - 0.6 * x + 0.2


def _bisect(f, lo, hi, it=200):
    flo = f(lo)
    for _ in range(it):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


W1_XSTAR = 2.557341117576044  # frozen from the bisection below
W1_X3 = 2 + math.sqrt(3)


def test_w1_xstar_bisection_oracle():
    xs = _bisect(_w1_h1_along_Y0, 1.0 + 1e-6, W1_X3 - 1e-9)
    assert xs == pytest.approx(W1_XSTAR, abs=1e-12)


def test_w1_report(w1):
    r = w1.x.report
    assert r.case_label == "Case1" and r.dominant == "xstar"
    assert r.xstar == pytest.approx(W1_XSTAR, abs=1e-12)
    assert r.x3 == pytest.approx(W1_X3, abs=1e-12)
    assert r.rate == pytest.approx(1 / W1_XSTAR)
    assert r.exponent == 0.0
    assert not r.periodic


def test_w1_xtilde1_independent(w1):
    # W1 is symmetric, so y* = x*; x~1 is the larger root of h(x, y*) = 0 in x
    y = W1_XSTAR
    # a_y = 0.1 y, b_y = 0.1 y^2 - 0.8 y + 0.3, c_y = 0.3 y
    xt = _big_root([0.1 * y, 0.1 * y * y - 0.8 * y + 0.3, 0.3 * y])
    r = w1.x.report
    assert r.ystar == pytest.approx(W1_XSTAR, abs=1e-12)
    assert r.xtilde1 == pytest.approx(xt, abs=1e-10)
    # Y0 at x~1 misses y*, so x~1 is not a pole of the boundary function
    y0 = _small_root([0.1 * xt, 0.1 * xt * xt - 0.8 * xt + 0.3, 0.3 * xt])
    assert abs(y0 - y) > 0.1
    assert not r.xtilde1_is_pole


def test_w1_f0_sign_pattern(w1):
    kp = w1.x.kp
    assert f0(kp, 1.5) < 0 < f0(kp, 3.0)
    assert f0(kp, W1_XSTAR) == pytest.approx(0.0, abs=1e-14)


def test_w1_directions_agree(w1):
    assert w1.y.report == w1.x.report


@pytest.mark.parametrize(
    "s, e, x3, case, dom",
    [
        (2.0, 3.0, 4.0, "Case1", "xstar"),
        (3.0, 2.0, 4.0, "Case1", "xtilde1"),
        (4.0, 4.0, 4.0, "Case1", "triple"),
        (4.0, INF, 4.0, "Case2a", "xstar=x3"),
        (4.0, 6.0, 4.0, "Case2a", "xstar=x3"),
        (INF, 4.0, 4.0, "Case2b", "xtilde1=x3"),
        (INF, INF, 4.0, "Case3", "x3"),
        (5.0, 6.0, 4.0, "Case3", "x3"),
        (3.0, 3.0, 4.0, "Case4", "xstar=xtilde1"),
        (4.0 * (1 + 1e-10), INF, 4.0, "Case2a", "xstar=x3"),
    ],
)
def test_case_table(s, e, x3, case, dom):
    r = classify(s, e, x3, PLAIN)
    assert (r.case_label, r.dominant) == (case, dom)
    assert r.x_dom == min(s, e, x3)


def test_non_pole_xtilde1_is_ignored():
    r = classify(3.0, 2.0, 4.0, PLAIN, xtilde1_is_pole=False)
    assert (r.case_label, r.dominant, r.x_dom) == ("Case1", "xstar", 3.0)
    assert any("not a pole" in w for w in r.warnings)


def test_near_boundary_warning():
    r = classify(2.0, 2.0 * (1 + 1e-6), 4.0, PLAIN)
    assert r.case_label == "Case1"
    assert any("near a case boundary" in w for w in r.warnings)
    assert classify(2.0, 3.0, 4.0, PLAIN).warnings == ()


@pytest.mark.parametrize(
    "shapes, s, e, periodic",
    [
        (ShapeClass(False, True, True), 2.0, 3.0, False),
        (ShapeClass(True, False, False), INF, INF, True),
        (ShapeClass(True, False, False), 2.0, 3.0, False),
        (ShapeClass(True, False, False), 4.0, INF, False),
        (ShapeClass(True, True, False), 2.0, 3.0, True),
        (ShapeClass(True, True, False), 3.0, 2.0, False),
        (ShapeClass(True, True, False), 4.0, INF, True),
        (ShapeClass(True, True, False), INF, 4.0, False),
        (ShapeClass(True, False, True), 2.0, 3.0, False),
        (ShapeClass(True, False, True), 3.0, 2.0, True),
        (ShapeClass(True, False, True), INF, 4.0, True),
        (ShapeClass(True, True, True), 2.0, 3.0, True),
        (ShapeClass(True, True, True), INF, INF, True),
    ],
)
def test_periodicity_by_scenario(shapes, s, e, periodic):
    assert classify(s, e, 4.0, shapes).periodic is periodic


def test_degrade_drops_removable_pole():
    r = classify(3.0, 3.0, 4.0, PLAIN)
    d = degrade(r, {"xstar"}, PLAIN)
    assert (d.case_label, d.dominant) == ("Case1", "xtilde1")
    assert not d.nonvanishing_ok
    d2 = degrade(r, {"xstar", "xtilde1"}, PLAIN)
    assert d2.case_label == "Case3"


@pytest.mark.parametrize(
    "name, case, dominant",
    [
        ("case2b", "Case2b", "xtilde1=x3"),
        ("case4", "Case4", "xstar=xtilde1"),
        ("triple", "Case1", "triple"),
        ("xtilde1_pole", "Case1", "xtilde1"),
        ("marginal_pole", "Case1", "xstar"),
        ("marginal_removable", "Case1", "xstar"),
        ("X3", "Case3", "x3"),
    ],
)
def test_fixture_classification(name, case, dominant):
    r = analyze(load_model(model_path(name))).report
    assert (r.case_label, r.dominant) == (case, dominant)


def test_x3_walk_is_periodic_scenario_2():
    r = analyze(load_model(model_path("X3"))).report
    assert r.shape_scenario == 2 and r.periodic and r.exponent == -1.5


def test_degenerate_boundary_without_upward_steps():
    # a1 = 0: the sextic collapses to a * b1^2, and h1 = b1(x) no longer depends on y
    spec = validate_spec({
        "interior": {"1,0": 0.1, "-1,0": 0.3, "0,1": 0.1, "0,-1": 0.3, "0,0": 0.2},
        "horizontal": {"1,0": 0.2, "-1,0": 0.5, "0,0": 0.3},
        "vertical": {"0,1": 0.1, "0,-1": 0.2, "1,0": 0.3, "0,0": 0.4},
        "origin": {"1,0": 0.5, "0,1": 0.5},
    })
    da = analyze(spec)
    # b1 = 0.5 - 0.7 x + 0.2 x^2 = 0.2 (x - 1)(x - 2.5)
    assert da.report.xstar == pytest.approx(2.5, abs=1e-9)
    assert da.report.case_label == "Case1"


def test_corpus_manifest_consistent():
    manifest = json.loads((CORPUS / "manifest.json").read_text())
    assert len(manifest) >= 20
    assert {m["indicator_sign"] for m in manifest} == {-1, 0, 1}
    for m in manifest:
        spec = load_model(CORPUS / m["file"])
        e = indicator(spec)
        if m["indicator_sign"] == 0:
            assert abs(e) < 1e-12
        else:
            assert np.sign(e) == m["indicator_sign"]
        assert m["expected"] == LABEL_BY_SIGN[m["indicator_sign"]]


@given(ergodic_specs())
@settings(max_examples=100, deadline=None)
def test_sextic_vanishes_at_one(spec):
    kp = K.build_polynomials(spec)
    f = sextic(kp.a, kp.b, kp.c, kp.a1, kp.b1)
    assert abs(K.polyval(f, 1.0)) <= 1e-12


@given(ergodic_specs(), st.floats(min_value=0.05, max_value=0.95))
@settings(max_examples=100, deadline=None)
def test_sextic_splits_into_branch_factors(spec, t):
    kp = K.build_polynomials(spec)
    bp = K.branch_points(K.discriminant(kp))
    x = bp.x[1] + t * (bp.x3 - bp.x[1])
    f = K.polyval(sextic(kp.a, kp.b, kp.c, kp.a1, kp.b1), x)
    assert f == pytest.approx(f0(kp, x) * f1_tilde(kp, x), rel=1e-10, abs=1e-13)


@given(ergodic_specs())
@settings(max_examples=60, deadline=None)
def test_xstar_is_a_zero_of_f0(spec):
    da = analyze(spec)
    r = da.report
    assert r.x_dom == min(r.xstar, r.xtilde1 if r.xtilde1_is_pole else INF, r.x3)
    if math.isfinite(r.xstar):
        assert 1.0 < r.xstar <= r.x3
        assert abs(f0(da.kp, r.xstar, branch_limit=r.xstar == r.x3)) <= 1e-9
        # x* is one of the attributed sextic roots
        assert min(abs(z - r.xstar) for z in da.sf.roots) <= 1e-8 * r.xstar
    else:
        assert f0(da.kp, r.x3, branch_limit=True) < 0
