"""Walk specification: validation, drift vectors, ergodicity and shape class."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import (
    MalformedModel,
    NegativeProbability,
    SumNotOne,
    UnsupportedStep,
)

Step = tuple[int, int]

REGIONS = ("interior", "horizontal", "vertical", "origin")

SUPPORTS: dict[str, frozenset[Step]] = {
    "interior": frozenset((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)),
    "horizontal": frozenset((i, j) for i in (-1, 0, 1) for j in (0, 1)),
    "vertical": frozenset((i, j) for i in (0, 1) for j in (-1, 0, 1)),
    "origin": frozenset((i, j) for i in (0, 1) for j in (0, 1)),
}

SUM_TOL = 1e-12
ZERO_DRIFT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WalkSpec:
    """Four transition maps keyed by step ``(di, dj)``; absent steps have probability 0."""

    interior: Mapping[Step, float]
    horizontal: Mapping[Step, float]
    vertical: Mapping[Step, float]
    origin: Mapping[Step, float]
    name: str = ""

    def region(self, name: str) -> Mapping[Step, float]:
        return getattr(self, name)

    def p(self, region: str, di: int, dj: int) -> float:
        return float(self.region(region).get((di, dj), 0.0))

    def transposed(self) -> "WalkSpec":
        """Swap the roles of the two coordinates."""
        flip = lambda m: {(j, i): v for (i, j), v in m.items()}
        return WalkSpec(
            interior=flip(self.interior),
            horizontal=flip(self.vertical),
            vertical=flip(self.horizontal),
            origin=flip(self.origin),
            name=f"{self.name}^T" if self.name else "",
        )

    def is_symmetric(self, tol: float = 0.0) -> bool:
        t = self.transposed()
        for r in REGIONS:
            keys = set(self.region(r)) | set(t.region(r))
            if any(abs(self.p(r, *k) - t.p(r, *k)) > tol for k in keys):
                return False
        return True

    def to_document(self) -> dict:
        doc = {}
        for r in REGIONS:
            items = sorted(self.region(r).items(), key=lambda kv: (kv[0][0], kv[0][1]))
            doc[r] = {f"{i},{j}": v for (i, j), v in items if v != 0.0}
        return doc

    def __eq__(self, other):
        if not isinstance(other, WalkSpec):
            return NotImplemented
        return self.to_document() == other.to_document()


def _parse_key(region: str, key) -> Step:
    if isinstance(key, tuple):
        step = key
    else:
        parts = str(key).split(",")
        if len(parts) != 2:
            raise MalformedModel(f"bad step key {key!r} in {region}", region=region)
        try:
            step = (int(parts[0].strip()), int(parts[1].strip()))
        except ValueError:
            raise MalformedModel(f"bad step key {key!r} in {region}", region=region) from None
    if step not in SUPPORTS[region]:
        raise UnsupportedStep(f"step {step} not allowed in {region}", region=region, step=step)
    return step


def validate_spec(raw: Mapping, name: str = "") -> WalkSpec:
    """Check a parsed model document and return a WalkSpec.

    Each map must sum to 1 within 1e-12; when it does, it is rescaled to sum
    exactly (up to rounding) to 1.
    """
    if not isinstance(raw, Mapping):
        raise MalformedModel("model document must be a mapping")
    extra = set(raw) - set(REGIONS) - {"name"}
    if extra:
        raise MalformedModel(f"unknown sections: {sorted(extra)}", sections=sorted(extra))
    maps = {}
    for region in REGIONS:
        if region not in raw:
            raise MalformedModel(f"missing section {region!r}", region=region)
        section = raw[region]
        if not isinstance(section, Mapping):
            raise MalformedModel(f"section {region!r} must be a mapping", region=region)
        probs: dict[Step, float] = {}
        for key, value in section.items():
            step = _parse_key(region, key)
            if step in probs:
                raise MalformedModel(f"duplicate step {step} in {region}", region=region)
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise MalformedModel(f"non-numeric probability at {region} {step}") from None
            if not math.isfinite(v):
                raise MalformedModel(f"non-finite probability at {region} {step}")
            if v < 0.0:
                raise NegativeProbability(
                    f"negative probability {v} at {region} {step}", region=region, step=step
                )
            probs[step] = v
        total = math.fsum(probs.values())
        if abs(total - 1.0) > SUM_TOL:
            raise SumNotOne(f"{region} sums to {total!r}", region=region, sum=total)
        maps[region] = {k: v / total for k, v in probs.items()}
    return WalkSpec(**maps, name=str(raw.get("name", name)))


def load_model(path: str | Path) -> WalkSpec:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedModel(f"{path}: not valid JSON ({exc})") from None
    return validate_spec(raw, name=path.stem)


def dump_model(spec: WalkSpec, path: str | Path) -> None:
    doc = spec.to_document()
    if spec.name:
        doc = {"name": spec.name, **doc}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


@dataclass(frozen=True)
class DriftVectors:
    M: tuple[float, float]
    M1: tuple[float, float]
    M2: tuple[float, float]


def _mean_step(m: Mapping[Step, float]) -> tuple[float, float]:
    return (
        math.fsum(i * v for (i, _), v in m.items()),
        math.fsum(j * v for (_, j), v in m.items()),
    )


def drift_vectors(spec: WalkSpec) -> DriftVectors:
    return DriftVectors(
        M=_mean_step(spec.interior),
        M1=_mean_step(spec.horizontal),
        M2=_mean_step(spec.vertical),
    )


@dataclass(frozen=True)
class Ergodicity:
    status: str  # "ergodic" | "not_ergodic" | "zero_drift"
    condition: int | None = None

    @property
    def ergodic(self) -> bool:
        return self.status == "ergodic"


def check_ergodic(drift: DriftVectors) -> Ergodicity:
    mx, my = drift.M
    mx1, my1 = drift.M1
    mx2, my2 = drift.M2
    if abs(mx) <= ZERO_DRIFT_TOL and abs(my) <= ZERO_DRIFT_TOL:
        return Ergodicity("zero_drift")
    cross1 = mx * my1 - my * mx1
    cross2 = my * mx2 - mx * my2
    if mx < 0 and my < 0:
        if cross1 < 0 and cross2 < 0:
            return Ergodicity("ergodic", 1)
    elif mx < 0 and my >= 0:
        ok = cross2 < 0
        if abs(my1) <= ZERO_DRIFT_TOL:
            ok = ok and mx1 < 0
        if ok:
            return Ergodicity("ergodic", 2)
    elif mx >= 0 and my < 0:
        ok = cross1 < 0
        if abs(mx2) <= ZERO_DRIFT_TOL:
            ok = ok and my2 < 0
        if ok:
            return Ergodicity("ergodic", 3)
    return Ergodicity("not_ergodic")


@dataclass(frozen=True)
class ShapeClass:
    interior_x_shaped: bool
    h1_x_shaped: bool
    h2_x_shaped: bool

    @property
    def scenario(self) -> int:
        """Shape scenario 1..5 for the boundary law along the x-axis."""
        if not self.interior_x_shaped:
            return 1
        if not self.h1_x_shaped and not self.h2_x_shaped:
            return 2
        if self.h1_x_shaped and not self.h2_x_shaped:
            return 3
        if self.h2_x_shaped and not self.h1_x_shaped:
            return 4
        return 5


def _x_shaped(m: Mapping[Step, float]) -> bool:
    # exact zero test on the axis steps
    return all(v == 0.0 for (i, j), v in m.items() if abs(i + j) == 1)


def origin_transient(spec: WalkSpec) -> bool:
    """True when the walk keeps i+j mod 2 everywhere except at the origin, which it leaves for good.

    Odd states then never return to even ones, so the origin cannot be recurrent.
    """
    parity_kept = all(_x_shaped(spec.region(r)) for r in ("interior", "horizontal", "vertical"))
    return parity_kept and not _x_shaped(spec.origin)


def classify_shape(spec: WalkSpec) -> ShapeClass:
    return ShapeClass(
        interior_x_shaped=_x_shaped(spec.interior),
        h1_x_shaped=_x_shaped(spec.horizontal),
        h2_x_shaped=_x_shaped(spec.vertical),
    )
