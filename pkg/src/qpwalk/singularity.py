"""Candidate poles x*, y*, x~1 and the case classification of the boundary tail."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from . import kernel as K
from .errors import AttributionAmbiguous, BracketFailure, NotErgodic, OutOfScopeZeroDrift
from .kernel import BranchPoints, KernelPolynomials, polyval
from .model import ShapeClass, WalkSpec, check_ergodic, classify_shape, drift_vectors, origin_transient

INF = math.inf
ATTRIBUTION_TOL = 1e-8
EQ_TOL = 1e-8
WARN_BAND = 1e-5
F0_TOL = 1e-12

CASE_EXPONENT = {"Case1": 0.0, "Case2a": -0.5, "Case2b": -0.5, "Case3": -1.5, "Case4": 1.0}


def sextic(a, b, c, a1, b1) -> np.ndarray:
    """a*b1^2 - b*b1*a1 + c*a1^2, padded to length 7."""
    f = P.polyadd(
        P.polysub(P.polymul(a, P.polymul(b1, b1)), P.polymul(b, P.polymul(b1, a1))),
        P.polymul(c, P.polymul(a1, a1)),
    )
    return np.pad(f, (0, max(0, 7 - len(f))))[:7]


def f0(kp: KernelPolynomials, x, branch_limit: bool = False):
    """h1(x, Y0(x))."""
    return kp.h1(x, K.eval_Y(kp, x, branch_limit).y0)


def f1_tilde(kp: KernelPolynomials, x):
    """a(x) h1(x, Y1(x)), written with a*Y1 = -b - a*Y0 so it stays finite when a(x) = 0."""
    ax = polyval(kp.a, x)
    ay1 = -polyval(kp.b, x) - ax * K.eval_Y(kp, x).y0
    return polyval(kp.a1, x) * ay1 + ax * polyval(kp.b1, x)


def _abs_eval(coef: np.ndarray, x) -> float:
    """sum |c_k| |x|^k, the backward-error scale of a polynomial value."""
    return float(sum(abs(c) * abs(x) ** k for k, c in enumerate(coef)))


def _residuals(kp: KernelPolynomials, z):
    """Relative residuals of f0 and f~1 at z, scaled by absolute-coefficient bounds."""
    y0 = K.eval_Y(kp, z).y0
    ax, a1x, b1x = polyval(kp.a, z), polyval(kp.a1, z), polyval(kp.b1, z)
    ay1 = -polyval(kp.b, z) - ax * y0
    A, A1, B, B1 = (_abs_eval(c, z) for c in (kp.a, kp.a1, kp.b, kp.b1))
    s0 = A1 * abs(y0) + B1
    s1 = A1 * (B + A * abs(y0)) + A * B1
    r0 = abs(a1x * y0 + b1x) / s0 if s0 > 0 else 0.0
    r1 = abs(a1x * ay1 + ax * b1x) / s1 if s1 > 0 else 0.0
    return r0, r1


def _roots(coef: np.ndarray) -> list[complex]:
    deg = K.effective_degree(coef, 1e-15)
    coef = coef[: deg + 1]
    scale = float(np.max(np.abs(coef))) if len(coef) else 0.0
    nzero = 0
    while nzero < deg and abs(coef[nzero]) <= 1e-15 * scale:
        nzero += 1
    rest = coef[nzero:]
    out = [0j] * nzero
    if len(rest) > 1:
        out += [complex(r) for r in P.polyroots(rest)]
    return sorted(out, key=lambda z: (abs(z), z.real, z.imag))


def _attribute(kp: KernelPolynomials, coef: np.ndarray, disc: np.ndarray, tol: float):
    roots, labels, residuals = [], [], []
    dscale = float(np.max(np.abs(disc)))
    for z in _roots(coef):
        zz = z.real if abs(z.imag) <= 1e-12 * (1 + abs(z)) else z
        r0, r1 = _residuals(kp, zz)
        if isinstance(zz, complex) and abs(z.imag) <= 1e-6 * (1 + abs(z)):
            # a real double root split by rounding into a conjugate pair
            s0, s1 = _residuals(kp, z.real)
            if min(s0, s1) < min(r0, r1):
                zz, r0, r1 = z.real, s0, s1
        near_branch = abs(polyval(disc, zz)) <= tol * dscale * max(1.0, abs(zz)) ** 4
        if r0 <= tol and r1 <= tol:
            label = "branch_point" if near_branch else "unresolved"
        elif r0 <= tol or r1 <= tol:
            label = "zero_of_f0" if r0 <= r1 else "zero_of_f1_tilde"
        elif near_branch:
            label = "branch_point"
        else:
            raise AttributionAmbiguous(f"sextic root {z:.10g} matches neither factor", root=z, r0=r0, r1=r1)
        roots.append(complex(zz))
        labels.append(label)
        residuals.append((r0, r1))
    return roots, labels, residuals


@dataclass(frozen=True, eq=False)
class SexticFactorization:
    kp: KernelPolynomials
    f: np.ndarray
    roots: list[complex]
    attribution: list[str]
    residuals: list[tuple[float, float]]
    g: np.ndarray
    g_roots: list[complex]
    g_attribution: list[str]
    g_residuals: list[tuple[float, float]]

    def flipped(self) -> "SexticFactorization":
        return SexticFactorization(
            kp=K.transposed(self.kp), f=self.g, roots=self.g_roots, attribution=self.g_attribution,
            residuals=self.g_residuals, g=self.f, g_roots=self.roots,
            g_attribution=self.attribution, g_residuals=self.residuals,
        )

    def fprime(self, x):
        return polyval(P.polyder(self.f), x)


def build_sextic(kp: KernelPolynomials, tol: float = ATTRIBUTION_TOL) -> SexticFactorization:
    kt = K.transposed(kp)
    f = sextic(kp.a, kp.b, kp.c, kp.a1, kp.b1)
    g = sextic(kt.a, kt.b, kt.c, kt.a1, kt.b1)
    disc = K.discriminant(kp)
    roots, lab, res = _attribute(kp, f, disc.d, tol)
    g_roots, g_lab, g_res = _attribute(kt, g, disc.d_y, tol)
    return SexticFactorization(kp, f, roots, lab, res, g, g_roots, g_lab, g_res)


def _flip_bp(bp: BranchPoints) -> BranchPoints:
    return BranchPoints(x=bp.y, y=bp.x)


def find_xstar(sf: SexticFactorization, bp: BranchPoints, tol: float = F0_TOL) -> float:
    """Zero of h1(x, Y0(x)) in (1, x3], or inf when there is none."""
    kp = sf.kp
    x3 = bp.x3
    y3 = K.eval_Y(kp, x3, branch_limit=True).y0
    scale = abs(polyval(kp.a1, x3)) * abs(y3) + abs(polyval(kp.b1, x3))
    v3 = kp.h1(x3, y3)
    if v3 < -tol * scale:
        return INF
    if v3 <= tol * scale:
        return x3

    real_roots = sorted(z.real for z in sf.roots if abs(z.imag) <= 1e-9 * (1 + abs(z)))
    g = lambda x: f0(kp, x)
    lo = 1.0
    if g(lo) >= -tol:
        above = [r for r in real_roots if r > 1 + 1e-9]
        r1 = min([x3] + above)
        lo = 0.5 * (1.0 + r1)
        k = 0
        while g(lo) >= 0 and k < 60:
            lo = 1.0 + 0.5 * (lo - 1.0)
            k += 1
        if g(lo) >= 0:
            raise BracketFailure("f0 is not negative to the right of 1", f0_x3=v3)
    try:
        xs = brentq(g, lo, x3, xtol=1e-15, rtol=1e-14, maxiter=500)
    except ValueError:
        raise BracketFailure("no sign change of f0 on (1, x3]", lo=lo, x3=x3) from None
    near = min((abs(r - xs) for r in real_roots), default=INF)
    if near > 1e-8 * xs:
        raise BracketFailure("zero of f0 is not a sextic root", xstar=xs, gap=near)
    return float(xs)


@dataclass(frozen=True)
class YSide:
    ystar: float
    xtilde1: float
    xtilde1_is_pole: bool


def find_ystar_and_xtilde1(sf: SexticFactorization, bp: BranchPoints, kp: KernelPolynomials) -> YSide:
    ystar = find_xstar(sf.flipped(), _flip_bp(bp))
    if math.isinf(ystar):
        return YSide(INF, INF, False)
    at_branch = ystar == bp.y3
    xt = K.X1(kp, ystar, branch_limit=at_branch)
    if isinstance(xt, complex):
        return YSide(ystar, INF, False)
    xt = float(xt)
    is_pole = False
    if 1 < xt <= bp.x3 * (1 + EQ_TOL):
        y0 = K.eval_Y(kp, min(xt, bp.x3), branch_limit=xt >= bp.x3).y0
        is_pole = abs(complex(y0) - ystar) <= 1e-7 * ystar
    return YSide(ystar, xt, is_pole)


@dataclass(frozen=True)
class SingularityReport:
    xstar: float
    ystar: float
    ytilde0: float | None
    xtilde1: float
    xtilde1_is_pole: bool
    x3: float
    x_dom: float
    case_label: str
    dominant: str
    shape_scenario: int
    periodic: bool
    nonvanishing_ok: bool = True
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def exponent(self) -> float:
        return CASE_EXPONENT[self.case_label]

    @property
    def rate(self) -> float:
        return 1.0 / self.x_dom


def _eq(u: float, v: float, tol: float) -> bool:
    if math.isinf(u) or math.isinf(v):
        return u == v
    return abs(u - v) <= tol * max(abs(u), abs(v))


def _periodic(scenario: int, case: str, dominant: str) -> bool:
    if scenario == 1:
        return False
    if case == "Case3" or scenario == 5:
        return True
    if scenario == 2:
        return False
    # scenario 3: -x* is a pole, -x~1 is not; scenario 4 the reverse
    own = "xstar" if scenario == 3 else "xtilde1"
    if case == "Case1":
        return dominant == own
    if case in ("Case2a", "Case2b"):
        return (case == "Case2a") == (own == "xstar")
    return False


def classify(
    xstar: float,
    xtilde1: float,
    x3: float,
    shapes: ShapeClass,
    *,
    ystar: float = INF,
    ytilde0: float | None = None,
    xtilde1_is_pole: bool = True,
    tol: float = EQ_TOL,
) -> SingularityReport:
    s = xstar
    e = xtilde1 if xtilde1_is_pole else INF
    eq = lambda u, v: _eq(u, v, tol)
    lt = lambda u, v: u < v and not eq(u, v)
    if math.isfinite(s) and eq(s, e) and eq(s, x3):
        case, dom = "Case1", "triple"
    elif lt(s, min(e, x3)):
        case, dom = "Case1", "xstar"
    elif lt(e, min(s, x3)):
        case, dom = "Case1", "xtilde1"
    elif eq(s, x3) and lt(x3, e):
        case, dom = "Case2a", "xstar=x3"
    elif eq(e, x3) and lt(x3, s):
        case, dom = "Case2b", "xtilde1=x3"
    elif lt(x3, min(s, e)):
        case, dom = "Case3", "x3"
    elif eq(s, e) and lt(s, x3):
        case, dom = "Case4", "xstar=xtilde1"
    else:  # pragma: no cover - the table above is exhaustive
        raise AssertionError((s, e, x3))
    x_dom = min(s, e, x3)
    warnings = []
    vals = {"xstar": s, "xtilde1": e, "x3": x3}
    names = list(vals)
    for i, u in enumerate(names):
        for v in names[i + 1 :]:
            a, b = vals[u], vals[v]
            if math.isfinite(a) and math.isfinite(b):
                gap = abs(a - b) / max(a, b)
                if tol < gap <= WARN_BAND:
                    warnings.append(f"{u} and {v} differ by only {gap:.3g} (near a case boundary)")
    if math.isfinite(xtilde1) and not xtilde1_is_pole:
        warnings.append("X1(y*) is not a pole of pi1: Y0 does not reach y* there")
    scenario = shapes.scenario
    return SingularityReport(
        xstar=s, ystar=ystar, ytilde0=ytilde0, xtilde1=xtilde1, xtilde1_is_pole=xtilde1_is_pole,
        x3=x3, x_dom=x_dom, case_label=case, dominant=dom, shape_scenario=scenario,
        periodic=_periodic(scenario, case, dom), warnings=tuple(warnings),
    )


def degrade(report: SingularityReport, drop: set[str], shapes: ShapeClass, tol: float = EQ_TOL) -> SingularityReport:
    """Reclassify with removable candidate poles discarded."""
    xs = INF if "xstar" in drop else report.xstar
    keep_xt = report.xtilde1_is_pole and "xtilde1" not in drop
    out = classify(
        xs, report.xtilde1, report.x3, shapes, ystar=report.ystar, ytilde0=report.ytilde0,
        xtilde1_is_pole=keep_xt, tol=tol,
    )
    return replace(out, nonvanishing_ok=False, warnings=out.warnings + (f"removable candidate(s) dropped: {sorted(drop)}",))


@dataclass(frozen=True, eq=False)
class DirectionAnalysis:
    """Everything the boundary analysis along the x-axis needs, for one orientation."""

    spec: WalkSpec
    kp: KernelPolynomials
    disc: K.Discriminant
    bp: BranchPoints
    sf: SexticFactorization
    shapes: ShapeClass
    report: SingularityReport
    f0_at_x3: float

    def transposed(self, tol_eq: float = EQ_TOL, tol_root: float = K.REAL_TOL) -> "DirectionAnalysis":
        return analyze(self.spec.transposed(), tol_eq=tol_eq, tol_root=tol_root)


def check_scope(spec: WalkSpec):
    drift = drift_vectors(spec)
    verdict = check_ergodic(drift)
    if verdict.status == "zero_drift":
        raise OutOfScopeZeroDrift("interior drift vanishes", M=drift.M)
    if not verdict.ergodic:
        raise NotErgodic("no ergodicity condition holds", M=drift.M, M1=drift.M1, M2=drift.M2)
    if origin_transient(spec):
        raise NotErgodic("chain is reducible: the origin is left for the odd-parity states and never revisited")
    return drift, verdict


def analyze(spec: WalkSpec, tol_eq: float = EQ_TOL, tol_root: float = K.REAL_TOL) -> DirectionAnalysis:
    check_scope(spec)
    kp = K.build_polynomials(spec)
    disc = K.discriminant(kp)
    K.check_nonsingular(kp, disc)
    bp = K.branch_points(disc, tol_root)
    K.check_nonsingular_genus1(kp, bp, disc)
    sf = build_sextic(kp)
    xs = find_xstar(sf, bp)
    ys = find_ystar_and_xtilde1(sf, bp, kp)
    shapes = classify_shape(spec)
    yt0 = None
    if math.isfinite(xs):
        yt0 = float(K.eval_Y(kp, xs, branch_limit=xs == bp.x3).real()[0])
    report = classify(
        xs, ys.xtilde1, bp.x3, shapes, ystar=ys.ystar, ytilde0=yt0,
        xtilde1_is_pole=ys.xtilde1_is_pole, tol=tol_eq,
    )
    v3 = float(f0(kp, bp.x3, branch_limit=True))
    return DirectionAnalysis(spec, kp, disc, bp, sf, shapes, report, v3)
