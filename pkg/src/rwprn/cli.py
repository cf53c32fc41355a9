"""Command-line front end: construct meshes, verify families, scan ambients.

Exit codes: 0 pass, 1 check failure, 2 invalid or inadmissible config.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .ambient import DomainError, WarpingFunction
from .families import RW0_KINDS, FamilySpec, SpecError, construct, validate_spec
from .surface import DegenerateError, FrameError, ImmersionError
from .verify import (
    CHECKS,
    CheckResult,
    VerificationReport,
    ambient_check,
    check_curvature_lemma,
    check_metric_compatibility,
    check_prn,
    check_ricci_on_grid,
    check_torsion,
    make_grid,
    spline_immersion,
    verify_family,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
CSV_HEADER = ["u", "v", "t", "x1", "x2", "x3", "x4"]
MESH_PRN_TOL = 1e-4
MESH_RANK_TOL = 1e-4

log = logging.getLogger("rwprn")


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("rwprn").joinpath("schemas", name).read_text())


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
    return cfg


def spec_from_config(cfg: dict) -> FamilySpec:
    amb = cfg.get("ambient", {})
    fam = cfg["family"]
    f = WarpingFunction.from_dict(amb["warping"]) if "warping" in amb else None
    c = int(amb.get("c", 0))
    if fam["kind"] in RW0_KINDS or fam["kind"] == "ProductCurve":
        if f is None:
            raise ConfigError(f"{fam['kind']} needs an ambient warping function")
    try:
        spec = FamilySpec.from_dict(fam, f=f, c=c)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad family block: {exc}") from exc
    if "c" in amb and spec.c != c:
        raise ConfigError(f"{spec.kind} lives in an ambient with c = {spec.c}, config says c = {c}")
    return spec


def parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        nu, nv = int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like 33x33, got {text!r}") from exc
    if nu < 4 or nv < 4:
        raise argparse.ArgumentTypeError("grid must be at least 4x4")
    return nu, nv


def grid_counts(cfg: dict, override) -> tuple[int, int]:
    if override:
        return override
    g = cfg.get("grid", {})
    return int(g.get("nu", 33)), int(g.get("nv", 33))


def grid_ranges(cfg: dict, spec: FamilySpec):
    g = cfg.get("grid", {})
    return tuple(g.get("u_range", spec.u_range)), tuple(g.get("v_range", spec.v_range))


def out_dir(cfg: dict, override) -> Path:
    d = Path(override or cfg.get("output", {}).get("dir", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fmt(x: float) -> str:
    return f"{x:.17g}" if math.isfinite(x) else "nan"


# ---------------------------------------------------------------- mesh files

def sample_mesh(immersion, us, vs) -> np.ndarray:
    """points[i, j] = phi(us[i], vs[j]); NaN rows where evaluation fails."""
    m = None
    rows = []
    for u in us:
        row = []
        for v in vs:
            try:
                p = np.asarray(immersion.point(float(u), float(v)), dtype=float)
                m = p.size
            except (DomainError, ArithmeticError, ValueError):
                p = None
            row.append(p)
        rows.append(row)
    m = m or 4
    return np.array([[p if p is not None else np.full(m, np.nan) for p in row] for row in rows])


def write_csv(path, us, vs, points) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i, u in enumerate(us):
            for j, v in enumerate(vs):
                p = points[i, j]
                cells = [_fmt(float(u)), _fmt(float(v))] + [_fmt(float(x)) for x in p]
                cells += [""] * (len(CSV_HEADER) - len(cells))
                w.writerow(cells)


def read_csv(path):
    """(us, vs, points, c) from a mesh CSV in u-major order."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header {header}")
        rows = [row for row in r if row]
    uv = np.array([[float(row[0]), float(row[1])] for row in rows])
    c_zero = all(row[6] == "" for row in rows)
    width = 3 if c_zero else 4
    pts = np.array([[float(x) for x in row[2:3 + width]] for row in rows])
    us = np.unique(uv[:, 0])
    vs = np.unique(uv[:, 1])
    if us.size * vs.size != len(rows):
        raise ConfigError("mesh CSV is not a full tensor grid")
    return us, vs, pts.reshape(us.size, vs.size, -1), c_zero


def write_obj(path, c: int, us, vs, points) -> None:
    nu, nv = len(us), len(vs)
    with open(path, "w") as fh:
        if c == 0:
            fh.write("# vertices: fiber coordinates (x1, x2, x3); t recorded as a trailing comment\n")
        else:
            fh.write("# vertices: projection (x1, x2, x3) / (1 + x0) of the fiber model; "
                     "t recorded as a trailing comment\n")
        for i in range(nu):
            for j in range(nv):
                p = points[i, j]
                t, x = p[0], p[1:]
                xyz = x if c == 0 else x[1:] / (1.0 + x[0])
                fh.write("v " + " ".join(_fmt(float(a)) for a in xyz) + f" # t={_fmt(float(t))}\n")
        for i in range(nu - 1):
            for j in range(nv - 1):
                a = i * nv + j + 1
                fh.write(f"f {a} {a + nv} {a + nv + 1} {a + 1}\n")


# ---------------------------------------------------------------- commands

def _diagnostics_exit(diags, out: Path, command: str) -> int:
    for d in diags:
        print(f"error: {d}", file=sys.stderr)
    report = {"command": command, "passed": False, "diagnostics": [d.to_dict() for d in diags]}
    (out / "report.json").write_text(json.dumps(report, indent=2))
    return EXIT_CONFIG


def cmd_construct(args, cfg: dict) -> int:
    spec = spec_from_config(cfg)
    out = out_dir(cfg, args.out)
    diags = validate_spec(spec)
    if diags:
        return _diagnostics_exit(diags, out, "construct")
    imm = construct(spec, perturb=args.perturb or 0.0)
    nu, nv = grid_counts(cfg, args.grid)
    (ulo, uhi), (vlo, vhi) = grid_ranges(cfg, spec)
    us, vs = np.linspace(ulo, uhi, nu), np.linspace(vlo, vhi, nv)
    points = sample_mesh(imm, us, vs)
    oc = cfg.get("output", {})
    name = oc.get("name", spec.kind)
    formats = oc.get("formats", ["csv"])
    written = []
    if "csv" in formats:
        write_csv(out / f"{name}.csv", us, vs, points)
        written.append(out / f"{name}.csv")
    if "obj" in formats:
        write_obj(out / f"{name}.obj", spec.c, us, vs, points)
        written.append(out / f"{name}.obj")
    for p in written:
        print(p)
    return EXIT_OK


def _checks_arg(text: str | None):
    if not text:
        return CHECKS
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
    return names


def cmd_verify(args, cfg: dict) -> int:
    spec = spec_from_config(cfg)
    out = out_dir(cfg, args.out)
    checks = _checks_arg(args.checks)
    diags = validate_spec(spec)
    if diags:
        return _diagnostics_exit(diags, out, "verify")
    nu, nv = grid_counts(cfg, args.grid)
    tolerances = dict(cfg.get("tolerances", {}))
    if args.tol is not None:
        tolerances["prn"] = args.tol
    if args.mesh:
        report = _verify_mesh(args, spec, nu, nv, checks)
    else:
        ur, vr = grid_ranges(cfg, spec)
        report = verify_family(spec, make_grid(ur, vr, nu, nv), checks=checks, tolerances=tolerances,
                               perturb=args.perturb or 0.0)
    data = {"command": "verify", **report.to_dict(), "config": cfg}
    (out / "report.json").write_text(json.dumps(data, indent=2))
    for chk in report.checks:
        print(chk)
    for err in report.errors:
        print(f"error: {err}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def _verify_mesh(args, spec: FamilySpec, nu: int, nv: int, checks) -> VerificationReport:
    us, vs, pts, c_zero = read_csv(args.mesh)
    if c_zero != (spec.c == 0):
        raise ConfigError("mesh CSV fiber dimension does not match the config ambient")
    imm = spline_immersion(spec.c, us, vs, pts, name=Path(args.mesh).stem)
    # stay one mesh cell inside so the spline boundary conditions do not leak in
    du, dv = us[1] - us[0], vs[1] - vs[0]
    grid = make_grid((us[0] + du, us[-1] - du), (vs[0] + dv, vs[-1] - dv), nu, nv)
    report = VerificationReport(conventions={"mode": "mesh", "source": str(args.mesh),
                                             "interpolation": "tensor-product spline"})
    tol = args.tol if args.tol is not None else MESH_PRN_TOL
    try:
        if "prn" in checks:
            report.add(check_prn(spec.f, spec.c, imm, grid, tol, spec.orientation, rank_tol=MESH_RANK_TOL))
        if "ricci" in checks:
            report.add(check_ricci_on_grid(spec.f, spec.c, imm, grid, MESH_PRN_TOL, spec.orientation))
    except FrameError as exc:
        report.errors.append(f"FrameError: {exc}")
    return report


def cmd_ambient_check(args, cfg: dict) -> int:
    amb = cfg.get("ambient")
    if not amb or "warping" not in amb:
        raise ConfigError("ambient-check needs an ambient block with a warping function")
    f = WarpingFunction.from_dict(amb["warping"])
    c = int(amb.get("c", 0))
    out = out_dir(cfg, args.out)
    problems = f.validate()
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    scan = ambient_check(f, c, zero_tol=args.tol if args.tol is not None else 1e-12)
    seed = args.seed if args.seed is not None else 0
    oracles: list[CheckResult] = [
        check_curvature_lemma(f, c, samples=100, seed=seed),
        check_metric_compatibility(f, c, samples=50, seed=seed),
        check_torsion(f, c, samples=50, seed=seed),
    ]
    passed = all(o.passed for o in oracles)
    data = {"command": "ambient-check", "passed": passed, "ambient": scan,
            "checks": [o.to_dict() for o in oracles], "config": cfg}
    (out / "report.json").write_text(json.dumps(data, indent=2))
    print(scan["status"])
    if scan["zero_set"]:
        print("zero set: " + ", ".join(f"{t:.6g}" for t in scan["zero_set"][:20]))
    for o in oracles:
        print(o)
    return EXIT_OK if passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", help="output directory (default: config output.dir or .)")
    common.add_argument("--grid", type=parse_grid, help="grid size NxM")
    common.add_argument("--tol", type=float, help="primary tolerance of the subcommand")
    common.add_argument("--perturb", type=float, help="normal offset eps*sin(u)*e4 of the family")
    common.add_argument("--checks", help="comma-separated subset of " + ",".join(CHECKS))
    common.add_argument("--seed", type=int, help="seed for randomized oracles")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="rwprn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("construct", parents=[common], help="sample a family and write mesh files")
    pv = sub.add_parser("verify", parents=[common], help="run the checker battery")
    pv.add_argument("--mesh", help="verify a mesh CSV (written by construct) instead of the family")
    sub.add_parser("ambient-check", parents=[common], help="scan the ambient curvature defect")
    return p


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "ambient-check": cmd_ambient_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ImmersionError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
