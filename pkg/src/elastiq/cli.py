"""Command-line front end: dispersion sweeps, reduction dumps, invariant suites.

Exit codes: 0 success, 1 a verified property failed, 2 bad configuration or
input file, 3 signature or mode-leakage failure during reduction.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateMaterial, ElastiqError, ModeLeakage, SignatureError
from .fields import DisplacementField, LameParameters, load_field
from .geometry import displacement_metric_field
from .kinematics import metric_from_displacement
from .quantization import dispersion_sweep
from .reduction import KKFields, reduce_metric, reduced_field_diagnostics, single_mode_fields_from_field
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REDUCTION = 0, 1, 2, 3

CONFIG_KEYS = {"material", "q2_grid", "q3_list", "field_file", "fd_step", "truncation", "output_dir", "seed", "grid"}
DEFAULT_GRID = [[0.0, 0.0, 0.0], [0.25, 0.5, 0.0], [0.5, -0.25, 0.0]]


class ConfigError(ElastiqError):
    """Invalid run configuration or input file."""


@dataclass(frozen=True)
class RunConfig:
    material: LameParameters
    q2_grid: list[float] = field(default_factory=list)
    q3_list: list[int] = field(default_factory=list)
    field_file: Path | None = None
    fd_step: float = 1e-2
    truncation: int = 0
    output_dir: Path = Path(".")
    seed: int = 42
    grid: list[list[float]] = field(default_factory=lambda: [list(p) for p in DEFAULT_GRID])

    def __post_init__(self):
        if not (isinstance(self.fd_step, (int, float)) and self.fd_step > 0 and math.isfinite(self.fd_step)):
            raise ConfigError(f"fd_step must be positive, got {self.fd_step!r}")
        if self.truncation < 0:
            raise ConfigError("truncation must be nonnegative")
        if not self.grid:
            raise ConfigError("grid must be nonempty")


def _number_list(value, name: str, integer: bool = False) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{name} must be a nonempty list")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{name} entries must be numbers")
        if integer:
            if float(v) != int(v):
                raise ConfigError(f"{name} entries must be integers")
            v = int(v)
        out.append(v if integer else float(v))
    return out


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = path.parent

    mat = raw.get("material")
    if not isinstance(mat, dict) or set(mat) != {"lambda", "mu"}:
        raise ConfigError("material must be an object with keys 'lambda' and 'mu'")
    try:
        material = LameParameters(float(mat["lambda"]), float(mat["mu"]))
    except (TypeError, ValueError, DegenerateMaterial) as exc:
        raise ConfigError(f"bad material: {exc}") from exc

    kw: dict = {"material": material}
    if "q2_grid" in raw:
        kw["q2_grid"] = _number_list(raw["q2_grid"], "q2_grid")
    if "q3_list" in raw:
        kw["q3_list"] = _number_list(raw["q3_list"], "q3_list", integer=True)
    if raw.get("field_file") is not None:
        kw["field_file"] = base / str(raw["field_file"])
    for key, kind in (("fd_step", float), ("truncation", int), ("seed", int)):
        if key in raw:
            v = raw[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and float(v) != int(v)):
                raise ConfigError(f"{key} must be a number")
            kw[key] = kind(v)
    kw["output_dir"] = base / str(raw.get("output_dir", "."))
    if "grid" in raw:
        pts = raw["grid"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("grid must be a nonempty list of 3-points")
        kw["grid"] = [_number_list(p, "grid point") for p in pts]
        if any(len(p) != 3 for p in kw["grid"]):
            raise ConfigError("grid points must have three coordinates")
    return RunConfig(**kw)


def _threads() -> int | None:
    v = os.environ.get("ELASTIQ_THREADS")
    if not v:
        return None
    try:
        n = int(v)
    except ValueError as exc:
        raise ConfigError("ELASTIQ_THREADS must be a positive integer") from exc
    if n < 1:
        raise ConfigError("ELASTIQ_THREADS must be a positive integer")
    return n


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


# -- commands -------------------------------------------------------------


def cmd_dispersion(cfg: RunConfig) -> int:
    if not cfg.q2_grid or not cfg.q3_list:
        raise ConfigError("q2_grid and q3_list must be nonempty")
    rows = dispersion_sweep(cfg.material, cfg.q2_grid, cfg.q3_list, workers=_threads())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q2", "q3", "E_minus", "E_zero", "E_plus", "stable"])
    for r in rows:
        w.writerow([repr(r.q2), r.q3, repr(r.E_minus), repr(r.E_zero), repr(r.E_plus), "true" if r.stable else "false"])
    write_atomic(cfg.output_dir / "dispersion.csv", buf.getvalue())
    return EXIT_OK


def _load_field(cfg: RunConfig) -> DisplacementField:
    if cfg.field_file is None:
        raise ConfigError("reduce needs field_file")
    try:
        return load_field(cfg.field_file)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed field file {cfg.field_file}: {exc}") from exc
    except ElastiqError as exc:
        raise ConfigError(f"malformed field file {cfg.field_file}: {exc}") from exc


def reduce_point(u: DisplacementField, p: Sequence[float], h: float, single_mode: bool) -> dict:
    """Block split and diagnostics at one internal-coordinate point."""
    p = np.asarray(p, dtype=float)
    kk = reduce_metric(metric_from_displacement(np.real(u.gradient(p)), check=False))
    m3 = displacement_metric_field(u)
    fields = KKFields.from_metric3(m3.eval, x3=float(p[2]))
    rep = reduced_field_diagnostics(fields, p[:2], h, metric3=None if single_mode else m3.eval)
    out = {"point": p.tolist(), **kk.to_json()}
    out.update(
        ricci3_norm=rep.ricci3_norm,
        maxwell_residual=rep.maxwell_residual.tolist(),
        einstein_residual=rep.einstein_residual.tolist(),
    )
    if single_mode:
        g_inv, A_up = single_mode_fields_from_field(u, p)
        out.update(g2_inverse=g_inv.tolist(), A_upper=A_up.tolist())
    return out


def cmd_reduce(cfg: RunConfig, single_mode: bool = False) -> int:
    u = _load_field(cfg)
    if single_mode and u.max_compact_wavenumber() != 0:
        raise ModeLeakage("single-mode reduction requested but the field has q3 != 0 modes")
    points = [reduce_point(u, p, cfg.fd_step, single_mode) for p in cfg.grid]
    doc = {"fd_step": cfg.fd_step, "single_mode": single_mode, "points": points}
    write_atomic(cfg.output_dir / "reduction.json", _dumps(doc))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    results = run_suite(suite, cfg.seed, cfg.fd_step, cfg.material)
    passed = all(r.passed for rs in results.values() for r in rs)
    doc = {
        "suite": suite,
        "seed": cfg.seed,
        "fd_step": cfg.fd_step,
        "passed": passed,
        "suites": {name: [r.to_json() for r in rs] for name, rs in results.items()},
    }
    write_atomic(cfg.output_dir / f"verify_{suite}.json", _dumps(doc))
    return EXIT_OK if passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elastiq", description="Elastic-medium field theory toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)
    d = sub.add_parser("dispersion", help="closed-form branch energies over a (q2, q3) grid")
    d.add_argument("--config", required=True)
    r = sub.add_parser("reduce", help="block split and reduced-field diagnostics on a grid")
    r.add_argument("--config", required=True)
    r.add_argument("--single-mode", action="store_true", help="require q3 = 0 and emit closed-form 2D fields")
    v = sub.add_parser("verify", help="run seeded invariant suites")
    v.add_argument("--config", required=True)
    v.add_argument("--suite", required=True, choices=[*SUITES, "all"])
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "dispersion":
            return cmd_dispersion(cfg)
        if args.command == "reduce":
            return cmd_reduce(cfg, args.single_mode)
        return cmd_verify(cfg, args.suite)
    except ConfigError as exc:
        print(f"elastiq: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SignatureError, ModeLeakage) as exc:
        print(f"elastiq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REDUCTION


if __name__ == "__main__":
    sys.exit(main())
