"""Exact tail laws: boundary, marginal and joint asymptotics with coefficients.

Coefficient normalisation. A law is reported as

    pi_n ~ [C + (-1)^(n-1) C_neg] * n^beta * x_dom^-(n-1)      (beta in {0, 1})
    pi_n ~ [C + (-1)^(n-1) C_neg] / sqrt(pi) * n^beta * x_dom^-(n-1)   (beta = -1/2, -3/2)

so C is directly comparable with pi_n * x_dom^(n-1) * n^-beta (times sqrt(pi)).
For the n^(-3/2) laws this means C = zeta * lim sqrt(1 - x/zeta) pi1'(x), where
zeta is the singular point; that extra zeta comes from shifting the index of the
differentiated series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from . import kernel as K
from .errors import (
    AlphaAtGammaPole,
    NonconvergentEvaluator,
    NotABranchPoint,
    NumericalFailure,
    OracleTooShallow,
    OracleUnavailable,
    OutsideRadius,
)
from .kernel import KernelPolynomials, polyval
from .oracle import GFAccess
from .singularity import CASE_EXPONENT, EQ_TOL, DirectionAnalysis, SingularityReport, degrade, f1_tilde

SQRT_PI = math.sqrt(math.pi)
NONVANISH_TOL = 1e-8


# --- Tauberian transfer ------------------------------------------------------

@dataclass(frozen=True)
class TransferLaw:
    """a_n ~ g / Gamma(alpha) * n^(alpha - 1) * R^-n."""

    alpha: float
    g: complex | float
    R: complex | float

    def coefficient(self, n):
        return self.g / math.gamma(self.alpha) * n ** (self.alpha - 1) * self.R ** (-n)


def tauberian_transfer(alpha: float, g, R) -> TransferLaw:
    if alpha <= 0 and float(alpha).is_integer():
        raise AlphaAtGammaPole(f"Gamma has a pole at alpha = {alpha}", alpha=alpha)
    if g == 0:
        raise ValueError("g must be nonzero")
    if abs(R) <= 0:
        raise ValueError("R must be nonzero")
    return TransferLaw(float(alpha), g, R)


def tauberian_multi(terms: list[tuple[float, complex, complex]]) -> Callable:
    """Sum of transfers over singularities zeta_k of equal modulus."""
    laws = [tauberian_transfer(a, g, z) for a, g, z in terms]

    def coefficient(n):
        total = sum(law.coefficient(n) for law in laws)
        return total.real if abs(complex(total).imag) < 1e-12 * (1 + abs(total)) else total

    return coefficient


# --- square-root decomposition near a branch point --------------------------

@dataclass(frozen=True, eq=False)
class SqrtDecomposition:
    """Y0 = p + q sqrt(1 - x/zeta) and h1(x, Y0) = p1 + q1 sqrt(1 - x/zeta) near zeta = +-x3."""

    kp: KernelPolynomials
    zeta: float
    sign: int
    p: float
    q: float
    p_star: float
    p1: float
    q1: float
    p1_star: float

    def p_fn(self, x):
        return -polyval(self.kp.b, x) / (2 * polyval(self.kp.a, x))

    def q_fn(self, x):
        d = polyval(K.expanded_disc(self.kp.a, self.kp.b, self.kp.c), x)
        return self.sign * math.sqrt(max(d, 0.0) / (1 - x / self.zeta)) / (2 * polyval(self.kp.a, x))

    def p1_fn(self, x):
        return self.p_fn(x) * polyval(self.kp.a1, x) + polyval(self.kp.b1, x)

    def q1_fn(self, x):
        return polyval(self.kp.a1, x) * self.q_fn(x)

    def h1_reconstructed(self, x, frozen: bool = False):
        s = math.sqrt(1 - x / self.zeta)
        if frozen:
            return self.p1 + self.q1 * s
        return self.p1_fn(x) + self.q1_fn(x) * s


def sqrt_decomposition(kp: KernelPolynomials, x_dom: float) -> SqrtDecomposition:
    d = K.expanded_disc(kp.a, kp.b, kp.c)
    dscale = float(np.max(np.abs(d)))
    if abs(polyval(d, x_dom)) > 1e-9 * dscale * max(1.0, abs(x_dom)) ** 4:
        raise NotABranchPoint(f"{x_dom} is not a root of the discriminant", x=x_dom)
    slope = -x_dom * polyval(P.polyder(d), x_dom)  # lim D1(x) / (1 - x/x_dom)
    if slope <= 0:
        raise NotABranchPoint(f"{x_dom} is not a simple branch point", x=x_dom)
    a = polyval(kp.a, x_dom)
    sign = -1 if x_dom > 0 else 1
    q = sign * math.sqrt(slope) / (2 * a)
    # p(x) = -b / (2a)
    b, da, db = polyval(kp.b, x_dom), K.polyder_val(kp.a, x_dom), K.polyder_val(kp.b, x_dom)
    p = -b / (2 * a)
    dp = -(db * a - b * da) / (2 * a * a)
    a1, b1 = polyval(kp.a1, x_dom), polyval(kp.b1, x_dom)
    p1 = p * a1 + b1
    dp1 = dp * a1 + p * K.polyder_val(kp.a1, x_dom) + K.polyder_val(kp.b1, x_dom)
    return SqrtDecomposition(
        kp=kp, zeta=x_dom, sign=sign, p=p, q=q, p_star=x_dom * dp,
        p1=p1, q1=a1 * q, p1_star=-x_dom * dp1,
    )


# --- oracle-backed evaluation with error propagation ----------------------

class _Probe:
    """Caches generating-function values and can bump one of them by its error bound."""

    def __init__(self, gf: GFAccess):
        self.gf = gf
        self.cache: dict = {}
        self.bump = None

    def _eval(self, name, arg):
        gf = self.gf
        try:
            if name == "pi00":
                return gf.pi00, gf.pi00_err
            if name == "pi1":
                return gf.pi1_at(arg)
            if name == "pi1p":
                return gf.pi1_prime_at(arg)
            if name == "pi2":
                return gf.pi2_at(arg)
            if name == "pi2p":
                return gf.pi2_prime_at(arg)
        except OutsideRadius as exc:
            raise NonconvergentEvaluator(str(exc), which=name, arg=arg) from None
        raise KeyError(name)

    def __call__(self, name, arg=None):
        key = (name, arg)
        if key not in self.cache:
            self.cache[key] = self._eval(name, arg)
        v, e = self.cache[key]
        return v + e if self.bump == key else v


class _Swapped:
    """The same probe seen from the transposed walk."""

    swap = {"pi1": "pi2", "pi2": "pi1", "pi1p": "pi2p", "pi2p": "pi1p", "pi00": "pi00"}

    def __init__(self, probe: _Probe):
        self.probe = probe

    def __call__(self, name, arg=None):
        return self.probe(self.swap[name], arg)


def propagate(gf: GFAccess, formula: Callable) -> tuple[float, float]:
    """Value of ``formula(probe)`` and a first-order error bound from the probe's inputs."""
    if gf is None:
        raise OracleUnavailable("coefficient needs generating-function values from the oracle")
    probe = _Probe(gf)
    value = formula(probe)
    err = 0.0
    for key in list(probe.cache):
        probe.bump = key
        err += abs(formula(probe) - value)
    probe.bump = None
    return float(value), float(err)


def _N(kp: KernelPolynomials, G, x, y):
    """h2 pi2 + h0 pi00 on the kernel curve."""
    return kp.h2(x, y) * G("pi2", y) + kp.h0(x, y) * G("pi00")


def _y0(kp, x, at_branch=False) -> float:
    return K.eval_Y(kp, x, branch_limit=at_branch).real()[0]


def _dY0(kp, x, y):
    return K.dY_dx(kp, x, y)


def _L(kp: KernelPolynomials, fcoef: np.ndarray, G, x):
    """Residue-type limit (1 - x/zeta) pi1(x) at a simple zero zeta of h1(x, Y0(x))."""
    y = _y0(kp, x)
    return _N(kp, G, x, y) * f1_tilde(kp, x) / (x * polyval(P.polyder(fcoef), x))


class CoefficientEngine:
    """Evaluates the boundary, marginal and joint coefficients for one direction."""

    def __init__(self, analysis: DirectionAnalysis, gf: GFAccess | None, tol_eq: float = EQ_TOL):
        self.an = analysis
        self.kp = analysis.kp
        self.kt = K.transposed(analysis.kp)
        self.gf = gf
        self.tol_eq = tol_eq

    # helpers -----------------------------------------------------------
    def _Lt(self, G, y):
        # mirrored residue at a pole y of pi2, evaluated through the transposed kernel
        return _L(self.kt, self.an.sf.g, _Swapped(G), y)

    def _is_branch(self, zeta) -> bool:
        return abs(abs(zeta) - self.an.bp.x3) <= self.tol_eq * self.an.bp.x3

    def sqrt_at(self, zeta) -> SqrtDecomposition:
        return sqrt_decomposition(self.kp, zeta)

    def pi1_continued(self, G, x):
        """pi1 through the kernel relation, valid up to x3 on the positive axis."""
        y = _y0(self.kp, x, self._is_branch(x))
        return -_N(self.kp, G, x, y) / self.kp.h1(x, y)

    # boundary coefficient at zeta (= +-x_dom) -------------------------------
    def _boundary_formula(self, report: SingularityReport, zeta: float) -> Callable:
        kp, case, dom = self.kp, report.case_label, report.dominant
        branch = self._is_branch(zeta)

        if case == "Case1" and dom == "xstar":
            return lambda G: _L(kp, self.an.sf.f, G, zeta)

        if case == "Case1" and dom == "xtilde1":
            yt = _y0(kp, zeta)
            d0 = _dY0(kp, zeta, yt)
            return lambda G: -kp.h2(zeta, yt) * yt * self._Lt(G, yt) / (kp.h1(zeta, yt) * d0 * zeta)

        if case == "Case1" and dom == "triple":
            sd = self.sqrt_at(zeta)
            yt = sd.p
            return lambda G: kp.h2(zeta, yt) * self._Lt(G, yt) * yt / (sd.q1 * sd.q)

        if case == "Case2a":
            sd = self.sqrt_at(zeta)
            return lambda G: _N(kp, G, zeta, sd.p) / (-sd.q1)

        if case == "Case2b":
            sd = self.sqrt_at(zeta)
            yt = sd.p
            return lambda G: kp.h2(zeta, yt) * yt * self._Lt(G, yt) / (kp.h1(zeta, yt) * sd.q)

        if case == "Case3":
            sd = self.sqrt_at(zeta)
            y = sd.p

            def c3(G):
                h1 = kp.h1(zeta, y)
                T = _N(kp, G, zeta, y) / (-h1)
                dN = (
                    kp.h2_dy(zeta, y) * G("pi2", y)
                    + kp.h2(zeta, y) * G("pi2p", y)
                    + kp.h0_dy(zeta, y) * G("pi00")
                )
                dT = (dN + kp.h1_dy(zeta, y) * T) / (-h1)
                return -0.5 * sd.q * dT

            return c3

        if case == "Case4":
            yt = _y0(kp, zeta)
            d0 = _dY0(kp, zeta, yt)
            dh1 = kp.h1_dx(zeta, yt) + kp.h1_dy(zeta, yt) * d0
            xt0 = K.X0(kp, yt)
            dg0 = kp.h2_dx(xt0, yt) * K.dX_dy(kp, yt, xt0) + kp.h2_dy(xt0, yt)

            def c4(G):
                num = kp.h1(xt0, yt) * G("pi1", xt0) + kp.h0(xt0, yt) * G("pi00")
                return kp.h2(zeta, yt) * num / (zeta * zeta * dh1 * d0 * dg0)

            return c4

        raise NumericalFailure(f"no coefficient formula for {case}/{dom}")  # pragma: no cover

    def check_nonvanishing(self, report: SingularityReport) -> set[str]:
        """Candidate poles whose residue numerator vanishes (removable singularities)."""
        drop: set[str] = set()
        kp = self.kp
        if math.isfinite(report.xstar) and report.ytilde0 is not None and self.gf is not None:
            y = report.ytilde0
            if abs(y) < self.gf.radius_y * (1 - self.gf.margin):
                G = _Probe(self.gf)
                n = _N(kp, G, report.xstar, y)
                scale = abs(kp.h2(report.xstar, y) * G("pi2", y)) + abs(kp.h0(report.xstar, y) * G("pi00"))
                if abs(n) <= NONVANISH_TOL * scale:
                    drop.add("xstar")
        if report.xtilde1_is_pole and self.gf is not None:
            ys = report.ystar
            x0 = K.X0(kp, ys)
            G = _Probe(self.gf)
            m = kp.h1(x0, ys) * G("pi1", x0) + kp.h0(x0, ys) * G("pi00")
            scale = abs(kp.h1(x0, ys) * G("pi1", x0)) + abs(kp.h0(x0, ys) * G("pi00"))
            if abs(m) <= NONVANISH_TOL * scale:
                drop.add("xtilde1")
        return drop

    def boundary_coefficient(self, report: SingularityReport | None = None):
        """(C, err, C_neg, err_neg, report) with report possibly degraded."""
        report = report or self.an.report
        if self.gf is None:
            raise OracleUnavailable("boundary coefficient needs the oracle")
        drop = self.check_nonvanishing(report)
        if drop:
            report = degrade(report, drop, self.an.shapes, self.tol_eq)
        C, err = propagate(self.gf, self._boundary_formula(report, report.x_dom))
        Cn = en = None
        if report.periodic:
            Cn, en = propagate(self.gf, self._boundary_formula(report, -report.x_dom))
        return C, err, Cn, en, report


# --- laws -------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticLaw:
    target: str
    rate: float
    exponent: float
    coefficient: float
    coefficient_error: float
    periodic_coefficient: float | None = None
    periodic_error: float | None = None
    j_factor: float | None = None
    case_label: str = ""
    note: str = ""

    @property
    def x_dom(self) -> float:
        return 1.0 / self.rate

    def value(self, n):
        n = np.asarray(n, dtype=float)
        c = self.coefficient
        if self.periodic_coefficient is not None:
            c = c + np.where(n % 2 == 1, 1.0, -1.0) * self.periodic_coefficient
        norm = 1.0 / SQRT_PI if self.exponent in (-0.5, -1.5) else 1.0
        return c * norm * n**self.exponent * self.rate ** (n - 1)

    def as_dict(self) -> dict:
        out = {
            "target": self.target,
            "rate": self.rate,
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "coefficient_error": self.coefficient_error,
        }
        if self.periodic_coefficient is not None:
            out["periodic_coefficient"] = self.periodic_coefficient
            out["periodic_coefficient_error"] = self.periodic_error
        if self.j_factor is not None:
            out["j_factor"] = self.j_factor
        if self.case_label:
            out["case"] = self.case_label
        if self.note:
            out["note"] = self.note
        return out


def boundary_law(report: SingularityReport, C: float, C_err: float, C_neg=None, C_neg_err=None, target="boundary_x") -> AsymptoticLaw:
    return AsymptoticLaw(
        target=target, rate=report.rate, exponent=CASE_EXPONENT[report.case_label],
        coefficient=C, coefficient_error=C_err,
        periodic_coefficient=C_neg if report.periodic else None,
        periodic_error=C_neg_err if report.periodic else None,
        case_label=report.case_label,
    )


@dataclass(frozen=True)
class JointCoefficients:
    """pi_{n,j} coefficients: A Y1^-(j-1) + B Y0^-(j-1), or (A + (j-1) B) Y^-(j-1) at a double root."""

    zeta: float
    A: float
    B: float
    Y0: float
    Y1: float
    double_root: bool

    def coefficient(self, j: int) -> float:
        if self.double_root:
            return (self.A + (j - 1) * self.B) * self.Y1 ** (-(j - 1))
        return self.A * self.Y1 ** (-(j - 1)) + self.B * self.Y0 ** (-(j - 1))


def joint_coefficients(kp: KernelPolynomials, report: SingularityReport, C: float, zeta: float) -> JointCoefficients:
    x3 = report.x3
    branch = abs(abs(zeta) - x3) <= EQ_TOL * x3
    bv = K.eval_Y(kp, zeta, branch_limit=branch)
    y0, y1 = bv.real()
    a, c, b1 = polyval(kp.a, zeta), polyval(kp.c, zeta), polyval(kp.b1, zeta)
    h1 = kp.h1(zeta, y0)
    case = report.case_label
    A0 = -C * b1 / c
    if case == "Case4":
        return JointCoefficients(zeta, A0, 0.0, y0, y1, False)
    if branch:
        # Y0 = Y1: characteristic root of the recursion is double
        return JointCoefficients(zeta, A0, -C * h1 / (a * y0 * y0), y0, y1, True)
    B = -h1 * C / (a * (y1 - y0) * y0)
    return JointCoefficients(zeta, A0 - B, B, y0, y1, False)


def coefficient_recursion(kp: KernelPolynomials, zeta: float, C0: float, J: int) -> list[float]:
    """Limit coefficients c_0..c_J from the phi-recursion with analytic terms dropped."""
    a, b, c = polyval(kp.a, zeta), polyval(kp.b, zeta), polyval(kp.c, zeta)
    a1, b1 = polyval(kp.a1, zeta), polyval(kp.b1, zeta)
    out = [C0, -b1 * C0 / c]
    if J >= 2:
        out.append(-(b * out[1] + a1 * out[0]) / c)
    for j in range(2, J):
        out.append(-(b * out[j] + a * out[j - 1]) / c)
    return out[: J + 1]


def joint_law(report: SingularityReport, kp: KernelPolynomials, C, C_err, C_neg, C_neg_err, j: int, target_prefix="joint_x") -> AsymptoticLaw:
    if j < 1:
        raise ValueError("joint laws are for j >= 1; j = 0 is the boundary law")
    jc = joint_coefficients(kp, report, C, report.x_dom)
    scale = jc.coefficient(j) / C if C != 0 else 0.0
    Cn = En = None
    if report.periodic and C_neg is not None:
        jn = joint_coefficients(kp, report, C_neg, -report.x_dom)
        Cn = jn.coefficient(j)
        En = abs(Cn / C_neg) * C_neg_err if C_neg else 0.0
    return AsymptoticLaw(
        target=f"{target_prefix}({j})", rate=report.rate, exponent=CASE_EXPONENT[report.case_label],
        coefficient=jc.coefficient(j), coefficient_error=abs(scale) * C_err,
        periodic_coefficient=Cn, periodic_error=En, j_factor=1.0 / jc.Y1, case_label=report.case_label,
    )


# --- marginal ---------------------------------------------------------------

def marginal_law(engine: CoefficientEngine, report: SingularityReport, C, C_err, C_neg, C_neg_err, target="marginal_x") -> AsymptoticLaw:
    """Law of the interior column sums sum_{j>=1} pi_{n,j}, read off pi(x, 1)."""
    kp, gf = engine.kp, engine.gf
    tol = engine.tol_eq
    eq = lambda u, v: math.isfinite(u) and math.isfinite(v) and abs(u - v) <= tol * max(abs(u), abs(v))
    mx = _drift_x(kp)
    at1 = polyval(kp.a_y, 1.0)
    X1 = K.eval_X(kp, 1.0).real()[1] if mx < 0 else 1.0
    xd = report.x_dom
    beta = CASE_EXPONENT[report.case_label]

    def K_of(x):
        return kp.h1(x, 1.0) / (-kp.h(x, 1.0))

    # X1(1) is a removable zero of h(x, 1) when y = 1 lies on the Y0 sheet there,
    # because the interlace relation then cancels the numerator
    # (at X1(1) = x_dom the cancellation leaves a pole, handled by case C below)
    removable = (
        mx < 0 and math.isfinite(X1) and not eq(X1, xd)
        and abs(K.eval_Y(kp, X1).real()[0] - 1.0) <= 1e-9
    )
    if mx >= 0 or removable or (X1 > xd and not eq(X1, xd)):
        # case A: same singularity as pi1, weighted by the analytic factor h1/(-h)
        Cn = En = None
        if report.periodic and C_neg is not None:
            Cn, En = K_of(-xd) * C_neg, abs(K_of(-xd)) * C_neg_err
        return AsymptoticLaw(
            target, report.rate, beta, K_of(xd) * C, abs(K_of(xd)) * C_err, Cn, En,
            case_label=report.case_label, note="A",
        )

    def N1(G, x, pi1_value):
        return kp.h1(x, 1.0) * pi1_value + kp.h2(x, 1.0) * G("pi2", 1.0) + kp.h0(x, 1.0) * G("pi00")

    denom = lambda x: at1 * (x - 1.0) * x

    if X1 < xd and not eq(X1, xd):
        # case B: simple pole of 1/h(x,1) dominates
        inside = X1 < gf.radius_x * (1 - gf.margin)
        pi1_at = (lambda G: G("pi1", X1)) if inside else (lambda G: engine.pi1_continued(G, X1))
        val, err = propagate(gf, lambda G: N1(G, X1, pi1_at(G)) / denom(X1))
        return AsymptoticLaw(target, 1.0 / X1, 0.0, val, err, note="B")

    dom = report.dominant
    if report.case_label == "Case1" and dom == "xstar":
        y0s, y1s = K.eval_Y(kp, xd).real()
        if abs(y0s - 1.0) <= 1e-7:
            # case C(a): h1(x*,1) = 0; the product h1(x,1) pi1(x) stays finite
            lim = -xd * kp.h1_dx(xd, 1.0) * C
            f = lambda G: (kp.h2(xd, 1.0) * G("pi2", 1.0) + kp.h0(xd, 1.0) * G("pi00") + lim) / denom(xd)
            val, err = propagate(gf, f)
            return AsymptoticLaw(target, report.rate, 0.0, val, err + abs(xd * kp.h1_dx(xd, 1.0)) * C_err / abs(denom(xd)), note="C(a)")
        # case C(b): double pole
        k = kp.h1(xd, 1.0) / denom(xd)
        return AsymptoticLaw(target, report.rate, 1.0, k * C, abs(k) * C_err, note="C(b)")
    if eq(xd, report.x3):
        if eq(report.xstar, report.x3):
            # case E: h1(x3, 1) = 0 kills the square-root term
            f = lambda G: (kp.h2(xd, 1.0) * G("pi2", 1.0) + kp.h0(xd, 1.0) * G("pi00")) / denom(xd)
            val, err = propagate(gf, f)
            return AsymptoticLaw(target, report.rate, 0.0, val, err, note="E")
        # case D: X1(1) = x3 below the poles; pi1(x3) through the kernel relation
        val, err = propagate(gf, lambda G: N1(G, xd, engine.pi1_continued(G, xd)) / denom(xd))
        return AsymptoticLaw(target, report.rate, 0.0, val, err, note="D")
    raise NumericalFailure(
        "X1(1) coincides with a pole other than x*", X1=X1, x_dom=xd, dominant=dom
    )


def _drift_x(kp: KernelPolynomials) -> float:
    # M_x = a_y(1) - c_y(1)
    return polyval(kp.a_y, 1.0) - polyval(kp.c_y, 1.0)


# --- balance-equation identities ---------------------------------------------

@dataclass(frozen=True)
class PhiCheck:
    x: float
    J: int
    balance: list[float]
    w_identity: list[float]
    closed_form: list[float]

    @property
    def max_residual(self) -> float:
        return max(self.balance + self.w_identity + self.closed_form)


def _rel(u, v) -> float:
    s = max(abs(u), abs(v), 1e-300)
    return abs(u - v) / s


def phi_recursion_check(kp: KernelPolynomials, gf: GFAccess, J: int, x: float) -> PhiCheck:
    """Check the row-generating-function identities of the balance equations at ``x``."""
    grid = gf.grid
    if J + 2 > grid.N // 2:
        raise OracleTooShallow("grid too small for the requested J", J=J, N=grid.N)
    p0 = np.asarray(grid.pi[0, :])
    a, b, c = polyval(kp.a, x), polyval(kp.b, x), polyval(kp.c, x)
    a1, b1 = polyval(kp.a1, x), polyval(kp.b1, x)
    a2, b2, c2 = polyval(kp.a2, x), polyval(kp.b2, x), polyval(kp.c2, x)
    a0, b0 = polyval(kp.a0, x), polyval(kp.b0, x)
    phi = [gf.phi_at(j, x)[0] for j in range(J + 2)]

    def astar(j):
        if j == 0:
            return -c2 * p0[1] - b0 * p0[0]
        if j == 1:
            return -c2 * p0[2] - b2 * p0[1] - a0 * p0[0]
        return -c2 * p0[j + 1] - b2 * p0[j] - a2 * p0[j - 1]

    balance = [_rel(c * phi[1] + b1 * phi[0], astar(0)), _rel(c * phi[2] + b * phi[1] + a1 * phi[0], astar(1))]
    for j in range(2, J + 1):
        balance.append(_rel(c * phi[j + 1] + b * phi[j] + a * phi[j - 1], astar(j)))

    y = _y0(kp, x)
    if abs(y) >= gf.radius_y * (1 - gf.margin):
        raise OracleTooShallow("Y0(x) outside the radius of pi2", y=y)
    u = y / c
    K_ = int(0.75 * grid.N)
    powers = y ** np.arange(K_)

    def tail(start):
        # sum_{j >= start} pi_{0,j} y^(j - start)
        seg = p0[start : start + K_]
        return float((seg * powers[: len(seg)]).sum())

    def fk(k):
        return -a2 * tail(k - 1) - b2 * tail(k) - c2 * tail(k + 1)

    w = {-1: -a1 / (a * u), 0: -b1}
    for j in range(1, J + 1):
        w[j] = b * u * w[j - 1] + (1 + b * u) * w[j - 2]
    h1 = a1 * y + b1
    w_ident = []
    for j in range(1, J + 1):
        lhs = (-1) ** j * (b * u * w[j - 1] + (1 + b * u) * w[j - 2]) + b1 + a1 * y
        w_ident.append(_rel(lhs, (-1) ** j * (1 + b * u) * w[j - 1]))
    g1 = astar(0) * a1 - b1 * astar(1)
    closed = []
    for j in range(1, J + 1):
        rhs = (-1) ** (j + 1) * y * u * fk(j + 1) * w[j - 1] + u * g1 * (a * u) ** (j - 1)
        for k in range(0, j - 1):
            rhs += u * (-1) ** (j + 1 - k) * astar(j - k) * w[j - 1 - k] * (a * u) ** k
        closed.append(_rel(h1 * phi[j], rhs))
    f = lambda seq: [float(v) for v in seq]
    return PhiCheck(x, J, f(balance), f(w_ident), f(closed))
