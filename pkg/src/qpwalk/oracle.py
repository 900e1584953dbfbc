"""Brute-force ground truth: truncated stationary solve, GF partial sums, decay fits."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numba
import numpy as np

from .errors import NoConvergence, OracleTooShallow, OutsideRadius, WindowTooNoisy
from .model import WalkSpec
from .singularity import CASE_EXPONENT, check_scope

MAX_SWEEPS = 200_000
UNDERFLOW = 1e-300
REL_FLOOR = 1e-250  # entries below this do not take part in the relative-change test

# region codes used by the sweep kernel
_INTERIOR, _HORIZONTAL, _VERTICAL, _ORIGIN = 0, 1, 2, 3
_REGION_NAMES = ("interior", "horizontal", "vertical", "origin")


def transition_tensor(spec: WalkSpec) -> np.ndarray:
    """T[region, di+1, dj+1]."""
    T = np.zeros((4, 3, 3))
    for r, name in enumerate(_REGION_NAMES):
        for (di, dj), v in spec.region(name).items():
            T[r, di + 1, dj + 1] = v
    return T


@numba.njit(cache=True)
def _region(m, n):
    if m > 0 and n > 0:
        return 0
    if m > 0:
        return 1
    if n > 0:
        return 2
    return 3


@numba.njit(cache=True)
def _denominators(T, N):
    # 1 - (hold + moves redirected to a self-loop at the box edge)
    den = np.empty((N + 1, N + 1))
    for m in range(N + 1):
        for n in range(N + 1):
            r = _region(m, n)
            stay = T[r, 1, 1]
            for di in range(-1, 2):
                for dj in range(-1, 2):
                    if di == 0 and dj == 0:
                        continue
                    if m + di > N or n + dj > N:
                        stay += T[r, di + 1, dj + 1]
            den[m, n] = 1.0 - stay
    return den


@numba.njit(cache=True)
def _inflow(pi, T, N, m, n):
    acc = 0.0
    for di in range(-1, 2):
        sm = m - di
        if sm < 0 or sm > N:
            continue
        for dj in range(-1, 2):
            if di == 0 and dj == 0:
                continue
            sn = n - dj
            if sn < 0 or sn > N:
                continue
            acc += pi[sm, sn] * T[_region(sm, sn), di + 1, dj + 1]
    return acc


@numba.njit(cache=True)
def _sweep(pi, T, den, N, floor):
    """One in-place lexicographic sweep. Returns (L1 change, max relative change)."""
    l1 = 0.0
    maxrel = 0.0
    for m in range(N + 1):
        for n in range(N + 1):
            new = _inflow(pi, T, N, m, n) / den[m, n]
            if new < 1e-300:
                new = 0.0
            d = abs(new - pi[m, n])
            l1 += d
            if new > floor:
                rel = d / new
                if rel > maxrel:
                    maxrel = rel
            pi[m, n] = new
    return l1, maxrel


@numba.njit(cache=True)
def _balance_residual(pi, T, den, N):
    res = 0.0
    for m in range(N + 1):
        for n in range(N + 1):
            res += abs(_inflow(pi, T, N, m, n) - den[m, n] * pi[m, n])
    return res


@dataclass(frozen=True, eq=False)
class StationaryGrid:
    N: int
    pi: np.ndarray
    residual: float
    iterations: int
    l1_change: float
    rel_change: float
    seconds: float
    name: str = ""

    @property
    def pi00(self) -> float:
        return float(self.pi[0, 0])

    @property
    def edge_mass(self) -> float:
        return float(self.pi[-1, :].sum() + self.pi[:, -1].sum() - self.pi[-1, -1])

    def row(self, j: int) -> np.ndarray:
        """pi_{n, j} for n = 0..N."""
        return self.pi[:, j]

    def column(self, i: int) -> np.ndarray:
        """pi_{i, n} for n = 0..N."""
        return self.pi[i, :]

    def marginal_x(self) -> np.ndarray:
        """Interior column sums sum_{j>=1} pi_{n,j}, the coefficients of pi(x, 1)."""
        return self.pi[:, 1:].sum(axis=1)

    def marginal_y(self) -> np.ndarray:
        return self.pi[1:, :].sum(axis=0)

    def transposed(self) -> "StationaryGrid":
        return StationaryGrid(
            self.N, self.pi.T, self.residual, self.iterations, self.l1_change,
            self.rel_change, self.seconds, self.name,
        )

    def dump_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "n", "pi"])
            for m in range(self.N + 1):
                for n in range(self.N + 1):
                    w.writerow([m, n, f"{self.pi[m, n]:.12g}"])


def reachable_from_origin(T: np.ndarray, N: int) -> np.ndarray:
    """Boolean mask of the states of the box the chain can reach from (0, 0)."""
    m = np.arange(N + 1)[:, None]
    n = np.arange(N + 1)[None, :]
    region = np.where(m > 0, np.where(n > 0, 0, 1), np.where(n > 0, 2, 3))
    moves = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            allowed = T[region, di + 1, dj + 1] > 0
            if allowed.any():
                moves.append((di, dj, allowed))
    reach = np.zeros((N + 1, N + 1), dtype=bool)
    reach[0, 0] = True
    frontier = reach.copy()
    while frontier.any():
        new = np.zeros_like(reach)
        for di, dj, allowed in moves:
            src = frontier & allowed
            # shift by (di, dj); moves leaving the box stay put
            dst = np.zeros_like(reach)
            dst[max(di, 0) : N + 1 + min(di, 0), max(dj, 0) : N + 1 + min(dj, 0)] = src[
                max(-di, 0) : N + 1 - max(di, 0), max(-dj, 0) : N + 1 - max(dj, 0)
            ]
            new |= dst
        frontier = new & ~reach
        reach |= frontier
    return reach


def solve_stationary(
    spec: WalkSpec,
    N: int = 400,
    tol: float = 1e-13,
    rel_tol: float | None = None,
    max_sweeps: int = MAX_SWEEPS,
) -> StationaryGrid:
    """Stationary law of the walk truncated to {0..N}^2.

    Sweeps stop when the L1 change falls below ``tol`` and, in addition, the
    largest relative change of any entry above ``REL_FLOOR`` falls below
    ``rel_tol`` (default ``tol``). The second test keeps far-tail entries
    honest: they are tiny, so the L1 test alone stops long before they settle.
    """
    check_scope(spec)
    if N < 50:
        raise ValueError("truncation N must be at least 50")
    rel_tol = tol if rel_tol is None else rel_tol
    T = transition_tensor(spec)
    den = _denominators(T, N)
    pi = reachable_from_origin(T, N).astype(float)
    pi /= pi.sum()
    t0 = time.perf_counter()
    l1 = rel = math.inf
    it = 0
    while it < max_sweeps:
        l1, rel = _sweep(pi, T, den, N, REL_FLOOR)
        it += 1
        s = pi.sum()
        pi /= s
        if l1 < tol and rel < rel_tol:
            break
    else:
        raise NoConvergence(
            f"no convergence after {it} sweeps", iterations=it, l1_change=l1, rel_change=rel
        )
    residual = float(_balance_residual(pi, T, den, N))
    pi.setflags(write=False)
    return StationaryGrid(
        N=N, pi=pi, residual=residual, iterations=it, l1_change=float(l1),
        rel_change=float(rel), seconds=time.perf_counter() - t0, name=spec.name,
    )


# --- generating-function evaluators -------------------------------------------

def _usable(grid: StationaryGrid) -> int:
    # entries near the box edge feel the truncation
    return int(0.75 * grid.N)


def _bias_rel(grid: StationaryGrid) -> float:
    return max(1e-12, 1e3 * grid.l1_change) + grid.edge_mass


def empirical_rate(seq: np.ndarray, N: int) -> float:
    lo, hi = N // 4, N // 2
    s = np.asarray(seq[lo : hi + 1], dtype=float)
    s = s[s > 0]
    if len(s) < 4:
        return 0.0
    n = np.arange(len(s))
    return float(math.exp(np.polyfit(n, np.log(s), 1)[0]))


def _series(coef: np.ndarray, z, deriv: bool, rate: float, K: int, bias: float):
    """sum_{k<K} coef[k] z^k (or its derivative) with an error bound."""
    absz = abs(z)
    t = absz * rate
    if t >= 1.0:
        raise OutsideRadius(f"|arg| = {absz:.6g} is outside the estimated radius {1 / rate:.6g}")
    k = np.arange(K)
    c = coef[:K]
    if deriv:
        terms = (k[1:] * c[1:]) * np.power(complex(z) if isinstance(z, complex) else z, k[1:] - 1)
        last = abs(terms[-1]) if len(terms) else 0.0
    else:
        terms = c * np.power(complex(z) if isinstance(z, complex) else z, k)
        last = abs(terms[-1])
    value = terms.sum()
    tail = 2.0 * last * t / (1.0 - t) / (1.0 - t)
    err = tail + bias * float(np.abs(terms).sum())
    value = complex(value) if np.iscomplexobj(terms) else float(value)
    return value, float(err)


@dataclass(frozen=True, eq=False)
class GFAccess:
    """Generating functions of the boundary and interior from an oracle grid.

    ``radius_x`` bounds the series of pi1, ``radius_y`` the series of pi2.
    Arguments must stay inside ``(1 - margin)`` of the radius.
    """

    grid: StationaryGrid
    radius_x: float
    radius_y: float
    margin: float = 0.01

    @property
    def pi00(self) -> float:
        return self.grid.pi00

    @property
    def pi00_err(self) -> float:
        return self.grid.pi00 * _bias_rel(self.grid)

    def _check(self, z, radius: float, which: str):
        if abs(z) > radius * (1 - self.margin):
            raise OutsideRadius(
                f"{which} requested at |{abs(z):.6g}| beyond {1 - self.margin:g} x radius {radius:.6g}",
                which=which, arg=z, radius=radius,
            )

    def _rate(self, radius: float) -> float:
        return 1.0 / radius

    def pi1_at(self, x):
        self._check(x, self.radius_x, "pi1")
        coef = np.asarray(self.grid.pi[1:, 0])
        return _series(coef, x, False, self._rate(self.radius_x), _usable(self.grid), _bias_rel(self.grid))

    def pi1_prime_at(self, x):
        self._check(x, self.radius_x, "pi1'")
        coef = np.asarray(self.grid.pi[1:, 0])
        return _series(coef, x, True, self._rate(self.radius_x), _usable(self.grid), _bias_rel(self.grid))

    def pi2_at(self, y):
        self._check(y, self.radius_y, "pi2")
        coef = np.asarray(self.grid.pi[0, 1:])
        return _series(coef, y, False, self._rate(self.radius_y), _usable(self.grid), _bias_rel(self.grid))

    def pi2_prime_at(self, y):
        self._check(y, self.radius_y, "pi2'")
        coef = np.asarray(self.grid.pi[0, 1:])
        return _series(coef, y, True, self._rate(self.radius_y), _usable(self.grid), _bias_rel(self.grid))

    def phi_at(self, j: int, x):
        """sum_{i>=1} pi_{i,j} x^{i-1}."""
        self._check(x, self.radius_x, f"phi_{j}")
        coef = np.asarray(self.grid.pi[1:, j])
        return _series(coef, x, False, self._rate(self.radius_x), _usable(self.grid), _bias_rel(self.grid))

    def pi_xy_at(self, x, y):
        self._check(x, self.radius_x, "pi(x,y)")
        self._check(y, self.radius_y, "pi(x,y)")
        K = _usable(self.grid)
        block = np.asarray(self.grid.pi[1 : K + 1, 1 : K + 1])
        px = np.power(x, np.arange(K))
        py = np.power(y, np.arange(K))
        terms = block * np.outer(px, py)
        tx, ty = abs(x) / self.radius_x, abs(y) / self.radius_y
        tail = 2.0 * (np.abs(terms[-1, :]).sum() * tx / (1 - tx) + np.abs(terms[:, -1]).sum() * ty / (1 - ty))
        err = tail + _bias_rel(self.grid) * float(np.abs(terms).sum())
        return terms.sum().item(), float(err)

    def transposed(self) -> "GFAccess":
        return GFAccess(self.grid.transposed(), self.radius_y, self.radius_x, self.margin)


def eval_gf(grid: StationaryGrid, which: str, arg, radius: float | tuple[float, float] | None = None, margin: float = 0.01):
    """Partial-sum evaluation of one generating function with an error bound.

    Without an explicit ``radius`` the radius is estimated from the empirical
    decay of the relevant boundary sequence.
    """
    if radius is None:
        rx = 1.0 / max(empirical_rate(grid.pi[:, 0], grid.N), 1e-300)
        ry = 1.0 / max(empirical_rate(grid.pi[0, :], grid.N), 1e-300)
    elif isinstance(radius, tuple):
        rx, ry = radius
    else:
        rx = ry = radius
    gf = GFAccess(grid, rx, ry, margin)
    dispatch: dict[str, Callable] = {
        "pi1": gf.pi1_at,
        "pi2": gf.pi2_at,
        "pi1_prime": gf.pi1_prime_at,
        "pi2_prime": gf.pi2_prime_at,
    }
    if which == "pi_xy":
        return gf.pi_xy_at(*arg)
    if which not in dispatch:
        raise ValueError(f"unknown generating function {which!r}")
    return dispatch[which](arg)


# --- empirical decay laws ----------------------------------------------------

@dataclass(frozen=True)
class Fit:
    rate: float
    exponent: float
    log_coefficient: float
    r2: float


@dataclass(frozen=True)
class EmpiricalLaw:
    rate_hat: float
    exponent_hat: float
    window: tuple[int, int]
    r2: float
    alternation_detected: bool
    even: Fit | None = None
    odd: Fit | None = None

    def nearest_exponent(self) -> float:
        return min(sorted(set(CASE_EXPONENT.values())), key=lambda b: abs(b - self.exponent_hat))


def fit_log_law(n: np.ndarray, values: np.ndarray) -> Fit:
    """Least squares of log v_n = A + beta log n + n log rho."""
    n = np.asarray(n, dtype=float)
    y = np.log(np.asarray(values, dtype=float))
    X = np.column_stack([np.ones_like(n), np.log(n), n])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return Fit(rate=float(math.exp(coef[2])), exponent=float(coef[1]), log_coefficient=float(coef[0]), r2=r2)


ALTERNATION_TOL = 2e-3


def decay_law(seq: Sequence[float], window: tuple[int, int]) -> EmpiricalLaw:
    """Fit a rho^n n^beta law to ``seq[n]`` over the inclusive index window."""
    lo, hi = window
    n = np.arange(lo, hi + 1)
    v = np.asarray(seq, dtype=float)[lo : hi + 1]
    if np.any(v <= 0) or len(v) < 8:
        raise WindowTooNoisy("sequence not strictly positive on the fit window", window=window)
    ev, od = n % 2 == 0, n % 2 == 1
    fe, fo = fit_log_law(n[ev], v[ev]), fit_log_law(n[od], v[od])
    mid = 0.5 * (lo + hi)
    pred = lambda f: f.log_coefficient + f.exponent * math.log(mid) + mid * math.log(f.rate)
    alternating = abs(pred(fe) - pred(fo)) > ALTERNATION_TOL
    if alternating:
        r2 = min(fe.r2, fo.r2)
        rate = 0.5 * (fe.rate + fo.rate)
        expo = 0.5 * (fe.exponent + fo.exponent)
    else:
        f = fit_log_law(n, v)
        r2, rate, expo = f.r2, f.rate, f.exponent
    if not r2 >= 0.99:
        raise WindowTooNoisy(f"log-linear fit r2 = {r2:.4f} below 0.99", window=window, r2=r2)
    return EmpiricalLaw(rate, expo, (lo, hi), r2, alternating, fe, fo)


def target_sequence(grid: StationaryGrid, target: str, index: int = 0) -> np.ndarray:
    if target == "row":
        return np.asarray(grid.row(index))
    if target == "column":
        return np.asarray(grid.column(index))
    if target == "marginal_x":
        return grid.marginal_x()
    if target == "marginal_y":
        return grid.marginal_y()
    raise ValueError(f"unknown target {target!r}")


def empirical_decay(
    grid: StationaryGrid,
    target: str = "row",
    index: int = 0,
    x_dom_hint: float | None = None,
    window: tuple[int, int] | None = None,
) -> EmpiricalLaw:
    """Empirical law of a row (pi_{n,j}), column (pi_{i,n}) or marginal over [N/4, N/2].

    ``x_dom_hint`` is used only to detect sequences that underflow inside the window.
    """
    window = window or (grid.N // 4, grid.N // 2)
    seq = target_sequence(grid, target, index)
    if x_dom_hint is not None and x_dom_hint > 1:
        # predicted value at the window end relative to the window start
        if window[1] * math.log(x_dom_hint) > 680:
            raise OracleTooShallow("sequence would underflow inside the fit window", hint=x_dom_hint)
    return decay_law(seq, window)


def dump_sequence(path: str | Path, n: Sequence[int], values: Sequence[float], predicted: Sequence[float] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "pi_n", "predicted_pi_n"])
        for i, k in enumerate(n):
            p = "" if predicted is None else f"{predicted[i]:.12g}"
            w.writerow([k, f"{values[i]:.12g}", p])
