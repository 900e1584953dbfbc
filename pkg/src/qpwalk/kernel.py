"""Kernel polynomials, discriminants, branch points and the algebraic branches.

Conventions: every polynomial is a numpy coefficient vector in ascending degree.
Polynomials written ``*_y`` have the variable y; all others have the variable x.
The kernel is

    h(x, y) = a(x) y^2 + b(x) y + c(x) = a_y(y) x^2 + b_y(y) x + c_y(y)

with boundary kernels h1 = a1(x) y + b1(x), h2 = a2_y(y) x + b2_y(y) and
origin kernel h0 = a0(x) y + b0(x).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    BranchPointOnUnitCircle,
    ComplexBranchPoint,
    DegenerateKernel,
    DegenerateQuadratic,
    Genus0Walk,
    SingularWalk,
)
from .model import WalkSpec

REAL_TOL = 1e-9
UNIT_CIRCLE_TOL = 1e-9
DISTINCT_TOL = 1e-7
DEGREE_TOL = 1e-14
SQUARE_TOL = 1e-10

INF = math.inf


def _vec(*coeffs) -> np.ndarray:
    return np.array(coeffs, dtype=float)


def polyval(coef: np.ndarray, x):
    """Horner evaluation returning a plain Python scalar."""
    acc = 0.0
    for c in coef[::-1]:
        acc = acc * x + float(c)
    return acc


def polyder_val(coef: np.ndarray, x):
    return polyval(P.polyder(coef), x) if len(coef) > 1 else 0.0


@dataclass(frozen=True, eq=False)
class KernelPolynomials:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    a_y: np.ndarray
    b_y: np.ndarray
    c_y: np.ndarray
    a1: np.ndarray
    b1: np.ndarray
    a1_y: np.ndarray
    b1_y: np.ndarray
    c1_y: np.ndarray
    a2: np.ndarray
    b2: np.ndarray
    c2: np.ndarray
    a2_y: np.ndarray
    b2_y: np.ndarray
    a0: np.ndarray
    b0: np.ndarray
    a0_y: np.ndarray
    b0_y: np.ndarray

    # kernels -------------------------------------------------------------
    def h(self, x, y):
        return polyval(self.a, x) * y * y + polyval(self.b, x) * y + polyval(self.c, x)

    def h_from_y(self, x, y):
        return polyval(self.a_y, y) * x * x + polyval(self.b_y, y) * x + polyval(self.c_y, y)

    def h1(self, x, y):
        return polyval(self.a1, x) * y + polyval(self.b1, x)

    def h2(self, x, y):
        return polyval(self.a2_y, y) * x + polyval(self.b2_y, y)

    def h0(self, x, y):
        return polyval(self.a0, x) * y + polyval(self.b0, x)

    # partial derivatives used by the coefficient formulas
    def h1_dx(self, x, y):
        return polyder_val(self.a1, x) * y + polyder_val(self.b1, x)

    def h1_dy(self, x, y):
        return polyval(self.a1, x)

    def h2_dx(self, x, y):
        return polyval(self.a2_y, y)

    def h2_dy(self, x, y):
        return polyder_val(self.a2_y, y) * x + polyder_val(self.b2_y, y)

    def h0_dx(self, x, y):
        return polyder_val(self.a0, x) * y + polyder_val(self.b0, x)

    def h0_dy(self, x, y):
        return polyval(self.a0, x)

    def as_dict(self) -> dict[str, list[float]]:
        return {k: [float(v) for v in getattr(self, k)] for k in self.__dataclass_fields__}


def build_polynomials(spec: WalkSpec) -> KernelPolynomials:
    p = lambda i, j: spec.p("interior", i, j)
    p1 = lambda i, j: spec.p("horizontal", i, j)
    p2 = lambda i, j: spec.p("vertical", i, j)
    p0 = lambda i, j: spec.p("origin", i, j)
    return KernelPolynomials(
        a=_vec(p(-1, 1), p(0, 1), p(1, 1)),
        b=_vec(p(-1, 0), -(1 - p(0, 0)), p(1, 0)),
        c=_vec(p(-1, -1), p(0, -1), p(1, -1)),
        a_y=_vec(p(1, -1), p(1, 0), p(1, 1)),
        b_y=_vec(p(0, -1), -(1 - p(0, 0)), p(0, 1)),
        c_y=_vec(p(-1, -1), p(-1, 0), p(-1, 1)),
        a1=_vec(p1(-1, 1), p1(0, 1), p1(1, 1)),
        b1=_vec(p1(-1, 0), -(1 - p1(0, 0)), p1(1, 0)),
        a1_y=_vec(p1(1, 0), p1(1, 1)),
        b1_y=_vec(p1(0, 0) - 1, p1(0, 1)),
        c1_y=_vec(p1(-1, 0), p1(-1, 1)),
        a2=_vec(p2(0, 1), p2(1, 1)),
        b2=_vec(p2(0, 0) - 1, p2(1, 0)),
        c2=_vec(p2(0, -1), p2(1, -1)),
        a2_y=_vec(p2(1, -1), p2(1, 0), p2(1, 1)),
        b2_y=_vec(p2(0, -1), -(1 - p2(0, 0)), p2(0, 1)),
        a0=_vec(p0(0, 1), p0(1, 1)),
        b0=_vec(-(1 - p0(0, 0)), p0(1, 0)),
        a0_y=_vec(p0(1, 0), p0(1, 1)),
        b0_y=_vec(-(1 - p0(0, 0)), p0(0, 1)),
    )


def transposed(kp: KernelPolynomials) -> KernelPolynomials:
    """Kernel data of the coordinate-swapped walk, built by permuting coefficients."""
    return KernelPolynomials(
        a=kp.a_y, b=kp.b_y, c=kp.c_y,
        a_y=kp.a, b_y=kp.b, c_y=kp.c,
        a1=kp.a2_y, b1=kp.b2_y,
        a1_y=kp.a2, b1_y=kp.b2, c1_y=kp.c2,
        a2=kp.a1_y, b2=kp.b1_y, c2=kp.c1_y,
        a2_y=kp.a1, b2_y=kp.b1,
        a0=kp.a0_y, b0=kp.b0_y,
        a0_y=kp.a0, b0_y=kp.b0,
    )


# --- discriminants ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Discriminant:
    d: np.ndarray
    d_y: np.ndarray
    degree: int
    degree_y: int


def _explicit_disc(a, b, c) -> np.ndarray:
    # a = (a0, a1, a2) etc. with b1 = -(1 - hold)
    pm11, p01, p11 = a
    pm10, bm, p10 = b
    pm1m1, p0m1, p1m1 = c
    d0 = pm10**2 - 4 * pm11 * pm1m1
    d1 = 2 * pm10 * bm - 4 * (pm11 * p0m1 + p01 * pm1m1)
    d2 = bm**2 + 2 * p10 * pm10 - 4 * (p11 * pm1m1 + p1m1 * pm11 + p01 * p0m1)
    d3 = 2 * p10 * bm - 4 * (p11 * p0m1 + p01 * p1m1)
    d4 = p10**2 - 4 * p11 * p1m1
    return _vec(d0, d1, d2, d3, d4)


def effective_degree(coef: np.ndarray, tol: float = DEGREE_TOL) -> int:
    scale = float(np.max(np.abs(coef))) if len(coef) else 0.0
    if scale == 0.0:
        return 0
    for k in range(len(coef) - 1, -1, -1):
        if abs(coef[k]) > tol * scale:
            return k
    return 0


def discriminant(kp: KernelPolynomials) -> Discriminant:
    d = _explicit_disc(kp.a, kp.b, kp.c)
    d_y = _explicit_disc(kp.a_y, kp.b_y, kp.c_y)
    return Discriminant(d=d, d_y=d_y, degree=effective_degree(d), degree_y=effective_degree(d_y))


def expanded_disc(a, b, c) -> np.ndarray:
    out = P.polysub(P.polymul(b, b), 4 * P.polymul(a, c))
    return np.pad(out, (0, max(0, 5 - len(out))))[:5]


# --- branch points ---------------------------------------------------------

@dataclass(frozen=True)
class BranchPoints:
    """x1..x4 and y1..y4, each ordered by modulus with infinities last."""

    x: tuple[float, float, float, float]
    y: tuple[float, float, float, float]

    @property
    def x3(self) -> float:
        return self.x[2]

    @property
    def y3(self) -> float:
        return self.y[2]


def _polish(coef: np.ndarray, r: float, steps: int = 3) -> float:
    dcoef = P.polyder(coef)
    for _ in range(steps):
        fv = polyval(coef, r)
        dv = polyval(dcoef, r)
        if dv == 0.0:
            break
        nr = r - fv / dv
        if abs(nr - r) > 1e-6 * max(1.0, abs(r)):
            break  # Newton wandering: keep the eigenvalue
        r = nr
    return r


def _near_double_root(coef: np.ndarray, z: complex) -> bool:
    # a real double root splits into a conjugate pair with imaginary part ~ sqrt(eps)
    if abs(z.imag) > 1e-6 * (1 + abs(z.real)):
        return False
    r = z.real
    scale = float(np.sum(np.abs(coef) * max(1.0, abs(r)) ** np.arange(len(coef))))
    return abs(polyval(coef, r)) <= 1e-12 * scale and abs(polyder_val(coef, r)) <= 1e-6 * scale


def _order_branch_points(coef: np.ndarray, degree: int, tol_real: float, axis: str):
    roots = P.polyroots(coef[: degree + 1]) if degree > 0 else np.array([])
    real = []
    for z in roots:
        if abs(z.imag) > tol_real * (1 + abs(z.real)):
            if _near_double_root(coef[: degree + 1], z):
                raise Genus0Walk(f"coincident {axis}-branch points near {z.real:.6g}", axis=axis)
            raise ComplexBranchPoint(
                f"non-real {axis}-branch point {complex(z):.6g}", axis=axis, root=complex(z)
            )
        real.append(float(_polish(coef[: degree + 1], float(z.real))))
    for r in real:
        if abs(abs(r) - 1.0) <= UNIT_CIRCLE_TOL:
            raise BranchPointOnUnitCircle(f"{axis}-branch point at {r:.12g}", axis=axis, root=r)
    inner = [r for r in real if abs(r) < 1]
    outer = [r for r in real if abs(r) > 1]
    if len(inner) != 2:
        raise DegenerateKernel(
            f"expected two {axis}-branch points inside the unit disk, found {len(inner)}",
            axis=axis,
        )
    outer += [INF] * (2 - len(outer))
    if len(outer) != 2:
        raise DegenerateKernel(f"too many {axis}-branch points outside the unit disk", axis=axis)
    inner_pos = [r for r in inner if r > 0]
    if not inner_pos:
        raise DegenerateKernel(f"no positive {axis}-branch point in (0,1)", axis=axis)
    x2 = max(inner_pos)
    inner.remove(x2)
    x1 = inner[0]
    outer_pos = [r for r in outer if r > 0]
    if not outer_pos:
        raise DegenerateKernel(f"no positive {axis}-branch point beyond 1", axis=axis)
    x3 = min(outer_pos)
    outer.remove(x3)
    x4 = outer[0]
    if abs(x1) > abs(x2) * (1 + 1e-12) or abs(x3) > abs(x4) * (1 + 1e-12):
        raise DegenerateKernel(f"{axis}-branch points violate the modulus ordering", axis=axis)
    return (x1, x2, x3, x4)


def branch_points(disc: Discriminant, tol_real: float = REAL_TOL) -> BranchPoints:
    return BranchPoints(
        x=_order_branch_points(disc.d, disc.degree, tol_real, "x"),
        y=_order_branch_points(disc.d_y, disc.degree_y, tol_real, "y"),
    )


# --- non-singularity and genus ---------------------------------------------

def _is_zero_poly(coef: np.ndarray) -> bool:
    return float(np.max(np.abs(coef))) <= DEGREE_TOL


def _share_root(polys: list[np.ndarray]) -> bool:
    """True when the nonzero polynomials in ``polys`` have a common root."""
    nz = [p[: effective_degree(p) + 1] for p in polys if not _is_zero_poly(p)]
    if not nz:
        return True
    nz.sort(key=len)
    base = nz[0]
    if len(base) == 1:
        return False
    for r in P.polyroots(base):
        scale = max(1.0, abs(r)) ** 2
        if all(abs(polyval(q, r)) <= 1e-10 * scale * max(1.0, float(np.max(np.abs(q)))) for q in nz[1:]):
            return True
    return False


def square_residual(d: np.ndarray) -> float:
    """Relative residual of the best polynomial square root of ``d``."""
    deg = effective_degree(d)
    scale = float(np.max(np.abs(d)))
    if scale == 0.0:
        return 0.0
    if deg % 2:
        return 1.0
    k = deg // 2
    q = np.zeros(k + 1, dtype=complex)
    q[k] = cmath.sqrt(d[deg])
    # match coefficients from the top down
    for i in range(k - 1, -1, -1):
        target = d[i + k]
        acc = sum(q[s] * q[i + k - s] for s in range(i + 1, k))
        q[i] = (target - acc) / (2 * q[k])
    sq = P.polymul(q, q)
    res = np.abs(sq[: deg + 1] - d[: deg + 1])
    return float(np.max(res)) / scale


def check_nonsingular(kp: KernelPolynomials, disc: Discriminant | None = None) -> None:
    """Raise unless the kernel is quadratic in both variables and irreducible."""
    if _is_zero_poly(kp.a) or _is_zero_poly(kp.c):
        raise DegenerateKernel("kernel is not quadratic in y")
    if _is_zero_poly(kp.a_y) or _is_zero_poly(kp.c_y):
        raise DegenerateKernel("kernel is not quadratic in x")
    if _share_root([kp.a, kp.b, kp.c]) or _share_root([kp.a_y, kp.b_y, kp.c_y]):
        raise SingularWalk("kernel has a factor depending on one variable only")
    disc = disc or discriminant(kp)
    if square_residual(disc.d) < SQUARE_TOL or square_residual(disc.d_y) < SQUARE_TOL:
        raise SingularWalk("discriminant is a perfect square: kernel is reducible")


def check_nonsingular_genus1(kp: KernelPolynomials, bp: BranchPoints, disc: Discriminant | None = None) -> None:
    """Raise unless the walk is non-singular with genus 1."""
    check_nonsingular(kp, disc)
    for axis, pts in (("x", bp.x), ("y", bp.y)):
        if sum(math.isinf(v) for v in pts) > 1:
            raise Genus0Walk(f"two {axis}-branch points at infinity", axis=axis)
        fin = [v for v in pts if math.isfinite(v)]
        scale = max(1.0, pts[2] if math.isfinite(pts[2]) else 1.0)
        gaps = [abs(u - v) for i, u in enumerate(fin) for v in fin[i + 1 :]]
        if gaps and min(gaps) <= DISTINCT_TOL * scale:
            raise Genus0Walk(f"coincident {axis}-branch points", axis=axis, gap=min(gaps))


# --- algebraic branches ----------------------------------------------------

@dataclass(frozen=True)
class BranchValue:
    y0: complex | float
    y1_val: complex | float

    def real(self) -> tuple[float, float]:
        return _as_real(self.y0), _as_real(self.y1_val)


def _as_real(z) -> float:
    if isinstance(z, complex):
        if abs(z.imag) > 1e-12 * (1 + abs(z.real)):
            raise ValueError(f"branch value {z} is not real")
        return z.real
    return float(z)


def _order(r1, r2):
    k1 = (abs(r1), getattr(r1, "real", r1), getattr(r1, "imag", 0.0))
    k2 = (abs(r2), getattr(r2, "real", r2), getattr(r2, "imag", 0.0))
    return (r1, r2) if k1 <= k2 else (r2, r1)


def quadratic_roots(A, B, C, branch_limit: bool = False) -> BranchValue:
    """Roots of A t^2 + B t + C, smaller modulus first."""
    scale = abs(A) + abs(B) + abs(C)
    if abs(A) <= DEGREE_TOL * scale:
        if abs(B) <= DEGREE_TOL * scale:
            raise DegenerateQuadratic("leading and middle coefficients vanish")
        return BranchValue(-C / B, INF)
    if branch_limit:
        r = -B / (2 * A)
        return BranchValue(r, r)
    D = B * B - 4 * A * C
    is_real = not any(isinstance(v, complex) for v in (A, B, C))
    if is_real:
        if D < 0 and -D <= 1e-13 * (B * B + 4 * abs(A * C)):
            D = 0.0
        if D >= 0:
            sq = math.sqrt(D)
            q = -0.5 * (B + math.copysign(sq, B)) if B != 0 else -0.5 * sq
            if q == 0.0:
                return BranchValue(0.0, 0.0)
            return BranchValue(*_order(q / A, C / q))
    sq = cmath.sqrt(D)
    Bc = complex(B)
    s = 1.0 if (Bc.conjugate() * sq).real >= 0 else -1.0
    q = -0.5 * (Bc + s * sq)
    if q == 0:
        return BranchValue(0j, 0j)
    return BranchValue(*_order(q / A, C / q))


def eval_Y(kp: KernelPolynomials, x, branch_limit: bool = False) -> BranchValue:
    return quadratic_roots(polyval(kp.a, x), polyval(kp.b, x), polyval(kp.c, x), branch_limit)


def eval_X(kp: KernelPolynomials, y, branch_limit: bool = False) -> BranchValue:
    return quadratic_roots(polyval(kp.a_y, y), polyval(kp.b_y, y), polyval(kp.c_y, y), branch_limit)


def Y0(kp: KernelPolynomials, x, branch_limit: bool = False):
    v = eval_Y(kp, x, branch_limit).y0
    return _as_real(v) if isinstance(x, (int, float)) and not isinstance(v, complex) else v


def Y1(kp: KernelPolynomials, x, branch_limit: bool = False):
    v = eval_Y(kp, x, branch_limit).y1_val
    return _as_real(v) if isinstance(x, (int, float)) and not isinstance(v, complex) else v


def X0(kp: KernelPolynomials, y, branch_limit: bool = False):
    v = eval_X(kp, y, branch_limit).y0
    return _as_real(v) if isinstance(y, (int, float)) and not isinstance(v, complex) else v


def X1(kp: KernelPolynomials, y, branch_limit: bool = False):
    v = eval_X(kp, y, branch_limit).y1_val
    return _as_real(v) if isinstance(y, (int, float)) and not isinstance(v, complex) else v


def dY_dx(kp: KernelPolynomials, x, y):
    """Slope of the branch through (x, y) on h = 0."""
    num = polyder_val(kp.a, x) * y * y + polyder_val(kp.b, x) * y + polyder_val(kp.c, x)
    return -num / (2 * polyval(kp.a, x) * y + polyval(kp.b, x))


def dX_dy(kp: KernelPolynomials, y, x):
    num = polyder_val(kp.a_y, y) * x * x + polyder_val(kp.b_y, y) * x + polyder_val(kp.c_y, y)
    return -num / (2 * polyval(kp.a_y, y) * x + polyval(kp.b_y, y))
