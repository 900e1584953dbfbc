"""Cross-shaped simple walks with M_y > 0 > M_x: closed-form region indicator and corpus."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .model import WalkSpec, dump_model, validate_spec

LABEL_BY_SIGN = {1: "Case1", 0: "Case2a", -1: "Case3"}
SIGN_NAMES = {1: "pos", 0: "zero", -1: "neg"}


def simple_x3(spec: WalkSpec) -> float:
    """Outer branch point x3 of a cross-shaped interior, from the quadratic factor of D1."""
    p = spec.interior
    p10, pm10 = p.get((1, 0), 0.0), p.get((-1, 0), 0.0)
    p01, p0m1 = p.get((0, 1), 0.0), p.get((0, -1), 0.0)
    p00 = p.get((0, 0), 0.0)
    # b(x)^2 - 4 a(x) c(x) = x^2 [ (p10 x^2 + (p00-1) x + pm10)^2 / x^2 - 4 p01 p0m1 ]
    # real roots > 1 solve p10 x^2 + (p00 - 1 + 2 sqrt(p01 p0m1)) x + pm10 = 0
    s = 2.0 * math.sqrt(p01 * p0m1)
    B = p00 - 1.0 + s
    disc = B * B - 4.0 * p10 * pm10
    r = (-B + math.sqrt(disc)) / (2 * p10), (-B - math.sqrt(disc)) / (2 * p10)
    return min(v for v in r if v > 1.0)


def indicator(spec: WalkSpec) -> float:
    """x3/(x3-1) [sqrt(p_{0,-1}/p_{0,1}) - 1] p1_{0,1} + p1_{1,0} x3 - p1_{-1,0}."""
    x3 = simple_x3(spec)
    p, h = spec.interior, spec.horizontal
    k = x3 / (x3 - 1.0) * (math.sqrt(p[(0, -1)] / p[(0, 1)]) - 1.0)
    return k * h.get((0, 1), 0.0) + h.get((1, 0), 0.0) * x3 - h.get((-1, 0), 0.0)


def _cross(rng):
    while True:
        w = rng.dirichlet(np.ones(5))
        p10, pm10, p01, p0m1, p00 = w
        if p10 < pm10 and p01 > p0m1 and min(w[:4]) > 0.03:
            return {"1,0": p10, "-1,0": pm10, "0,1": p01, "0,-1": p0m1, "0,0": p00}


def generate(rng: np.random.Generator, sign: int) -> dict:
    """One ergodic cross-shaped walk whose indicator has the requested sign."""
    while True:
        interior = _cross(rng)
        mx = interior["1,0"] - interior["-1,0"]
        my = interior["0,1"] - interior["0,-1"]
        # vertical axis: need M_y M2_x - M_x M2_y < 0
        v10, v01 = rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2)
        v0m1 = rng.uniform(0.3, 0.7)
        if v10 + v01 + v0m1 > 0.98 or my * v10 - mx * (v01 - v0m1) >= 0:
            continue
        vertical = {"0,1": v01, "0,-1": v0m1, "1,0": v10, "0,0": 1 - v10 - v01 - v0m1}
        h01, h10 = rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)
        draft = {"interior": interior, "horizontal": {"1,0": h10, "-1,0": 0.0, "0,1": h01, "0,0": 1 - h10 - h01},
                 "vertical": vertical, "origin": {"1,0": 0.3, "0,1": 0.3, "0,0": 0.4}}
        base = validate_spec(draft)
        target = indicator(base)  # with p1_{-1,0} = 0 this is the value that zeroes the indicator
        if sign == 0:
            hm10 = target
        elif sign > 0:
            hm10 = target * rng.uniform(0.2, 0.8)
        else:
            hm10 = target + rng.uniform(0.05, 0.3)
        if not 0.0 < hm10 < 1 - h10 - h01 - 0.01:
            continue
        draft["horizontal"] = {"1,0": h10, "-1,0": hm10, "0,1": h01, "0,0": 1 - h10 - h01 - hm10}
        spec = validate_spec(draft)
        e = indicator(spec)
        if sign != 0 and (e > 0) != (sign > 0):
            continue
        return draft


def write_corpus(directory: str | Path, per_sign: int = 8, seed: int = 2) -> list[dict]:
    """Model files plus a manifest of expected x-direction case labels."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    manifest = []
    for sign in (1, 0, -1):
        for k in range(per_sign):
            draft = generate(rng, sign)
            name = f"ex2_{SIGN_NAMES[sign]}_{k:02d}"
            spec = validate_spec(draft, name=name)
            spec = WalkSpec(spec.interior, spec.horizontal, spec.vertical, spec.origin, name)
            dump_model(spec, directory / f"{name}.model")
            manifest.append({"file": f"{name}.model", "indicator_sign": sign, "expected": LABEL_BY_SIGN[sign]})
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
