"""End-to-end analysis of one walk: both directions, coefficients, laws, oracle comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernel as K
from .asymptotics import (
    AsymptoticLaw,
    CoefficientEngine,
    boundary_law,
    joint_law,
    marginal_law,
)
from .errors import OracleTooShallow, QPWalkError
from .model import WalkSpec, drift_vectors
from .oracle import GFAccess, StationaryGrid, decay_law, solve_stationary, target_sequence
from .singularity import EQ_TOL, DirectionAnalysis, SingularityReport, analyze

VERIFY_RATE_TOL = 0.01
VERIFY_EXPONENT_TOL = 0.15
VERIFY_COEF_TOL = 0.05


@dataclass(frozen=True, eq=False)
class WalkAnalysis:
    spec: WalkSpec
    x: DirectionAnalysis
    y: DirectionAnalysis

    def direction(self, axis: str) -> DirectionAnalysis:
        return self.x if axis == "x" else self.y


def analyze_walk(spec: WalkSpec, tol_eq: float = EQ_TOL, tol_root: float = K.REAL_TOL) -> WalkAnalysis:
    """Classification along both axes; touches no oracle."""
    ax = analyze(spec, tol_eq=tol_eq, tol_root=tol_root)
    ay = analyze(spec.transposed(), tol_eq=tol_eq, tol_root=tol_root)
    return WalkAnalysis(spec, ax, ay)


def gf_access(wa: WalkAnalysis, grid: StationaryGrid) -> GFAccess:
    # series radii are the dominant singularities of pi1 and pi2
    return GFAccess(grid, wa.x.report.x_dom, wa.y.report.x_dom)


@dataclass
class DirectionLaws:
    axis: str
    report: SingularityReport
    boundary: AsymptoticLaw
    marginal: AsymptoticLaw | None
    joint: list[AsymptoticLaw] = field(default_factory=list)
    marginal_error: str | None = None

    def all_laws(self) -> list[AsymptoticLaw]:
        out = [self.boundary]
        if self.marginal is not None:
            out.append(self.marginal)
        return out + list(self.joint)


def direction_laws(wa: WalkAnalysis, grid: StationaryGrid, axis: str, jmax: int, tol_eq: float = EQ_TOL) -> DirectionLaws:
    gf = gf_access(wa, grid)
    if axis == "y":
        gf = gf.transposed()
    an = wa.direction(axis)
    engine = CoefficientEngine(an, gf, tol_eq=tol_eq)
    C, e, Cn, en, report = engine.boundary_coefficient()
    bl = boundary_law(report, C, e, Cn, en, target=f"boundary_{axis}")
    marginal, merr = None, None
    try:
        marginal = marginal_law(engine, report, C, e, Cn, en, target=f"marginal_{axis}")
    except QPWalkError as exc:
        merr = exc.describe()
    joint = [joint_law(report, an.kp, C, e, Cn, en, j, target_prefix=f"joint_{axis}") for j in range(1, jmax + 1)]
    return DirectionLaws(axis, report, bl, marginal, joint, merr)


def axes(direction: str) -> tuple[str, ...]:
    return ("x", "y") if direction == "both" else (direction,)


# --- verification ------------------------------------------------------------

def law_sequence(grid: StationaryGrid, law: AsymptoticLaw) -> np.ndarray:
    t = law.target
    if t.startswith("boundary_"):
        return np.asarray(grid.row(0) if t.endswith("x") else grid.column(0))
    if t.startswith("marginal_"):
        return target_sequence(grid, t)
    index = int(t[t.index("(") + 1 : -1])
    if t.startswith("joint_x"):
        return np.asarray(grid.row(index))
    return np.asarray(grid.column(index))


@dataclass(frozen=True)
class VerifyRow:
    target: str
    predicted_rate: float
    empirical_rate: float
    predicted_exponent: float
    empirical_exponent: float
    coefficient_ratio: float
    alternation_detected: bool
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "predicted_rate": self.predicted_rate,
            "empirical_rate": self.empirical_rate,
            "predicted_exponent": self.predicted_exponent,
            "empirical_exponent": self.empirical_exponent,
            "coefficient_ratio": self.coefficient_ratio,
            "alternation_detected": self.alternation_detected,
            "pass": self.passed,
            "detail": self.detail,
        }

    def text(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.target}: predicted {self.predicted_rate:.5f}, empirical {self.empirical_rate:.5f} "
            f"(exponent {self.predicted_exponent:g} vs {self.empirical_exponent:.3f}, "
            f"coefficient ratio {self.coefficient_ratio:.4f}), {verdict}"
        )


def verify_law(grid: StationaryGrid, law: AsymptoticLaw, window: tuple[int, int] | None = None) -> VerifyRow:
    window = window or (grid.N // 4, grid.N // 2)
    seq = law_sequence(grid, law)
    if window[1] * -math.log(law.rate) > 680:
        raise OracleTooShallow("predicted law underflows inside the fit window", target=law.target)
    emp = decay_law(seq, window)
    n = np.arange(window[0], window[1] + 1)
    ratio = float(np.mean(seq[n] / law.value(n)))
    rate_ok = abs(emp.rate_hat - law.rate) <= VERIFY_RATE_TOL * law.rate
    expo_ok = abs(emp.exponent_hat - law.exponent) <= VERIFY_EXPONENT_TOL
    coef_ok = abs(ratio - 1.0) <= VERIFY_COEF_TOL
    return VerifyRow(
        law.target, law.rate, emp.rate_hat, law.exponent, emp.exponent_hat, ratio,
        emp.alternation_detected, rate_ok and expo_ok and coef_ok,
    )


def solve(spec: WalkSpec, N: int, tol: float) -> StationaryGrid:
    return solve_stationary(spec, N=N, tol=tol)


def drift_summary(spec: WalkSpec) -> dict:
    d = drift_vectors(spec)
    return {"M": list(d.M), "M1": list(d.M1), "M2": list(d.M2)}
