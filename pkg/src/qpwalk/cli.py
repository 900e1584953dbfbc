"""Command-line front end: ``qpwalk {validate,classify,asymptotics,verify,report} MODEL``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernel as K
from .errors import QPWalkError
from .model import WalkSpec, check_ergodic, classify_shape, drift_vectors, load_model
from .pipeline import (
    WalkAnalysis,
    analyze_walk,
    axes,
    direction_laws,
    law_sequence,
    solve,
    verify_law,
)
from .singularity import EQ_TOL, SingularityReport

COMMANDS = ("validate", "classify", "asymptotics", "verify", "report")
DIGITS = 12


@dataclass(frozen=True)
class RunConfig:
    command: str
    model_path: str
    N: int = 400
    tol_root: float = K.REAL_TOL
    tol_eq: float = EQ_TOL
    tol_solver: float = 1e-13
    direction: str = "both"
    jmax: int = 3
    format: str = "text"
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        for name in ("tol_root", "tol_eq", "tol_solver"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.N < 50:
            raise ValueError("N must be at least 50")
        if self.jmax < 0:
            raise ValueError("jmax must be non-negative")


# --- document helpers ----------------------------------------------------------

def _clean(obj):
    """Round floats to 12 significant digits; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.{DIGITS}g}")
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def report_dict(r: SingularityReport) -> dict:
    d = dataclasses.asdict(r)
    d["rate"] = r.rate
    d["exponent"] = r.exponent
    d["warnings"] = list(r.warnings)
    return d


def spec_document(spec: WalkSpec) -> dict:
    drift = drift_vectors(spec)
    shapes = classify_shape(spec)
    erg = check_ergodic(drift)
    return {
        "name": spec.name,
        "transitions": spec.to_document(),
        "drift": {"M": list(drift.M), "M1": list(drift.M1), "M2": list(drift.M2)},
        "ergodicity": {"status": erg.status, "condition": erg.condition},
        "shape": {**dataclasses.asdict(shapes), "scenario": shapes.scenario},
    }


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.{DIGITS}g}"
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


# --- commands ------------------------------------------------------------------

def _classify(wa: WalkAnalysis, cfg: RunConfig) -> dict:
    return {ax: report_dict(wa.direction(ax).report) for ax in axes(cfg.direction)}


def _laws(wa: WalkAnalysis, grid, cfg: RunConfig) -> dict:
    out = {}
    for ax in axes(cfg.direction):
        dl = direction_laws(wa, grid, ax, cfg.jmax, cfg.tol_eq)
        out[ax] = dl
    return out


def _grid_summary(grid) -> dict:
    return {
        "N": grid.N,
        "iterations": grid.iterations,
        "residual": grid.residual,
        "l1_change": grid.l1_change,
        "pi00": grid.pi00,
    }


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns (exit code, report document)."""
    doc: dict = {"command": cfg.command, "model": cfg.model_path}
    try:
        spec = load_model(cfg.model_path)
        doc["spec"] = spec_document(spec)
        if cfg.command == "validate":
            return 0, doc
        wa = analyze_walk(spec, tol_eq=cfg.tol_eq, tol_root=cfg.tol_root)
        doc["classification"] = _classify(wa, cfg)
        if cfg.command == "classify":
            return 0, doc
        grid = solve(spec, cfg.N, cfg.tol_solver)
        doc["oracle"] = _grid_summary(grid)
        laws = _laws(wa, grid, cfg)
        doc["laws"] = {ax: [law.as_dict() for law in dl.all_laws()] for ax, dl in laws.items()}
        doc["effective_classification"] = {ax: report_dict(dl.report) for ax, dl in laws.items()}
        merr = {ax: dl.marginal_error for ax, dl in laws.items() if dl.marginal_error}
        if merr:
            doc["marginal_errors"] = merr
        doc["_grid"] = grid
        doc["_laws"] = laws
        if cfg.command == "asymptotics":
            return 0, doc
        rows = []
        for ax, dl in laws.items():
            for law in dl.all_laws():
                try:
                    rows.append(verify_law(grid, law).as_dict())
                except QPWalkError as exc:
                    rows.append({"target": law.target, "pass": False, "detail": exc.describe()})
        doc["verify"] = rows
        return 0, doc
    except QPWalkError as exc:
        doc["error"] = {
            "type": type(exc).__name__,
            "stage": exc.stage,
            "message": str(exc),
            "details": {k: v if isinstance(v, (int, float, str, bool)) else str(v) for k, v in exc.details.items()},
        }
        return exc.exit_code, doc


def _public(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if not k.startswith("_")}


def render_text(doc: dict) -> str:
    lines = [f"model: {doc['model']}"]
    if "error" in doc:
        e = doc["error"]
        lines.append(f"error: {e['type']} in stage {e['stage']}: {e['message']}")
        for k, v in sorted(e["details"].items()):
            lines.append(f"  {k} = {_fmt(v)}")
        return "\n".join(lines) + "\n"
    spec = doc["spec"]
    lines.append(f"ergodicity: {spec['ergodicity']['status']} (condition {spec['ergodicity']['condition']})")
    lines.append(f"shape scenario: {spec['shape']['scenario']}")
    if doc["command"] == "validate":
        for region, m in spec["transitions"].items():
            lines.append(f"  {region}: " + ", ".join(f"({k}) {_fmt(v)}" for k, v in m.items()))
        return "\n".join(lines) + "\n"
    for ax, r in doc["classification"].items():
        lines.append(f"direction {ax}:")
        lines.append(f"  case = {r['case_label']}")
        lines.append(f"  dominant = {r['dominant']}")
        lines.append(f"  x_dom = {_fmt(r['x_dom'])}")
        lines.append(f"  rate = {_fmt(r['rate'])}")
        lines.append(f"  exponent = {_fmt(r['exponent'])}")
        lines.append(f"  periodic = {_fmt(r['periodic'])}")
        pole = "" if r["xtilde1_is_pole"] else " (not a pole)"
        lines.append(f"  x* = {_fmt(r['xstar'])}, x~1 = {_fmt(r['xtilde1'])}{pole}, x3 = {_fmt(r['x3'])}")
        for w in r["warnings"]:
            lines.append(f"  warning: {w}")
    if "laws" in doc:
        o = doc["oracle"]
        lines.append(f"oracle: N = {o['N']}, sweeps = {o['iterations']}, pi00 = {_fmt(o['pi00'])}")
        for ax, laws in doc["laws"].items():
            eff = doc["effective_classification"][ax]
            if not eff["nonvanishing_ok"]:
                lines.append(f"direction {ax}: degraded to {eff['case_label']} ({eff['dominant']})")
            for law in laws:
                s = (
                    f"  {law['target']}: rate {_fmt(law['rate'])}, exponent {_fmt(law['exponent'])}, "
                    f"C = {_fmt(law['coefficient'])} +- {law['coefficient_error']:.2g}"
                )
                if "periodic_coefficient" in law:
                    s += f", C_neg = {_fmt(law['periodic_coefficient'])}"
                if "j_factor" in law:
                    s += f", j_factor {_fmt(law['j_factor'])}"
                lines.append(s)
        for ax, msg in doc.get("marginal_errors", {}).items():
            lines.append(f"  marginal_{ax}: not available ({msg})")
    for row in doc.get("verify", []):
        if "predicted_rate" in row:
            verdict = "PASS" if row["pass"] else "FAIL"
            lines.append(
                f"{row['target']}: predicted {row['predicted_rate']:.5f}, empirical {row['empirical_rate']:.5f}, "
                f"exponent {row['predicted_exponent']:g} vs {row['empirical_exponent']:.3f}, "
                f"coefficient ratio {row['coefficient_ratio']:.4f}, {verdict}"
            )
        else:
            lines.append(f"{row['target']}: FAIL ({row['detail']})")
    return "\n".join(lines) + "\n"


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def sequence_csv(grid, law, window=None) -> str:
    seq = law_sequence(grid, law)
    hi = window[1] if window else grid.N // 2
    n = np.arange(1, hi + 1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "pi_n", "predicted_pi_n"])
    pred = law.value(n)
    for k, p in zip(n, pred):
        w.writerow([int(k), f"{seq[k]:.{DIGITS}g}", f"{p:.{DIGITS}g}"])
    return buf.getvalue()


def render_csv(doc: dict) -> str:
    laws = doc.get("_laws")
    if laws and "error" not in doc:
        first = next(iter(laws.values()))
        return sequence_csv(doc["_grid"], first.boundary)
    rows: list = []
    _flatten("", _clean(_public(doc)), rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in rows:
        w.writerow([k, v])
    return buf.getvalue()


def write_report_files(doc: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(_public(doc)))
    if "_grid" in doc:
        grid = doc["_grid"]
        grid.dump_csv(out / "grid.csv")
        for dl in doc["_laws"].values():
            for law in dl.all_laws():
                name = law.target.replace("(", "_").replace(")", "")
                (out / f"sequence_{name}.csv").write_text(sequence_csv(grid, law))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpwalk", description="Exact tail asymptotics of quarter-plane random walks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("model_pos", nargs="?", metavar="MODEL", help="model file (or use --model)")
    p.add_argument("--model", dest="model_opt", metavar="PATH")
    p.add_argument("--N", type=int, default=400, help="oracle truncation size (default 400)")
    p.add_argument("--tol-root", type=float, default=K.REAL_TOL)
    p.add_argument("--tol-eq", type=float, default=EQ_TOL)
    p.add_argument("--tol-solver", type=float, default=1e-13)
    p.add_argument("--direction", choices=("x", "y", "both"), default="both")
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--format", choices=("text", "structured", "csv"), default="text")
    p.add_argument("--out", metavar="PATH", help="write output here (report: a directory)")
    return p


def config_from_args(argv=None) -> RunConfig:
    parser = build_parser()
    a = parser.parse_args(argv)
    model = a.model_opt or a.model_pos
    if model is None:
        parser.error("a model file is required")
    if a.model_opt and a.model_pos and a.model_opt != a.model_pos:
        parser.error("give the model either positionally or with --model, not both")
    try:
        return RunConfig(
            command=a.command, model_path=model, N=a.N, tol_root=a.tol_root, tol_eq=a.tol_eq,
            tol_solver=a.tol_solver, direction=a.direction, jmax=a.jmax, format=a.format, out=a.out,
        )
    except ValueError as exc:
        parser.error(str(exc))


BATCH_COMMANDS = ("validate", "classify")


def run_directory(cfg: RunConfig) -> tuple[int, list[dict]]:
    """Run a cheap command over every ``*.model`` file of a directory, in name order."""
    results = [run(dataclasses.replace(cfg, model_path=str(p))) for p in sorted(Path(cfg.model_path).glob("*.model"))]
    code = max((c for c, _ in results), default=0)
    return code, [d for _, d in results]


def _main_directory(cfg: RunConfig) -> int:
    if cfg.command not in BATCH_COMMANDS:
        print(f"error: {cfg.command} takes a single model file, not a directory", file=sys.stderr)
        return 2
    code, docs = run_directory(cfg)
    if not docs:
        print(f"error: no .model files in {cfg.model_path}", file=sys.stderr)
        return 2
    if cfg.format == "structured":
        text = dumps({"models": [_public(d) for d in docs]})
    elif cfg.format == "csv":
        text = "".join(render_csv(d) for d in docs)
    else:
        text = "\n".join(render_text(d) for d in docs)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    cfg = config_from_args(argv)
    if Path(cfg.model_path).is_dir():
        return _main_directory(cfg)
    if not Path(cfg.model_path).is_file():
        print(f"error: cannot read model file {cfg.model_path}", file=sys.stderr)
        return 2
    code, doc = run(cfg)
    if cfg.format == "structured":
        text = dumps(_public(doc))
    elif cfg.format == "csv":
        text = render_csv(doc)
    else:
        text = render_text(doc)
    if cfg.command == "report" and cfg.out:
        write_report_files(doc, Path(cfg.out))
        sys.stdout.write(text)
    elif cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if "error" in doc:
        e = doc["error"]
        print(f"{e['type']} [{e['stage']}]: {e['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
