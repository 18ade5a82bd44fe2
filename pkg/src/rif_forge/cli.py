"""Command-line front end: ``rif-forge <command> <target> [options]``.

Targets are catalog names (``ex_iso1``, ``phi_d(4)``, ...) or polynomial
JSON files. Angles accept the token ``pi`` (``pi``, ``-pi/2``, ``2*pi``).

Exit codes: 0 success, 2 usage error, 3 a reliability flag fired,
4 invalid model (the interior witness is printed), 5 method not applicable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import catalog, catalog_entries
from .errors import (InvalidModel, MethodInapplicable, PsiSingular, RifError,
                     StabilityViolation, UnknownExample, VerificationFailed,
                     VerticalLineAtCenter)
from .poly import MultiPoly, parse_angle, parse_poly
from .rif import RIFModel, make_rif

EXIT_OK, EXIT_USAGE, EXIT_FLAGGED, EXIT_INVALID, EXIT_INAPPLICABLE = 0, 2, 3, 4, 5

COMMANDS = ("catalog", "analyze", "integrability", "newton", "boundary", "levelset", "scan")


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing

def _angles(text: str, count: int, what: str) -> tuple:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != count:
        raise UsageError(f"{what} needs {count} comma-separated angles, got {text!r}")
    try:
        return tuple(parse_angle(s) for s in parts)
    except ValueError as exc:
        raise UsageError(f"bad angle in {what}: {exc}") from None


def _angle_strings(text: str, count: int, what: str) -> tuple:
    """Keep ``0``/``pi`` tokens as strings so exact centers stay exact."""
    _angles(text, count, what)
    return tuple(s.strip() for s in text.split(","))


def parse_lambda(text: str):
    """``1``, ``-i``, ``0.6+0.8i`` or ``@pi/3`` (meaning ``exp(i*pi/3)``)."""
    from .levelsets import as_unimodular

    s = text.strip()
    try:
        if s.startswith("@"):
            return as_unimodular(np.exp(1j * parse_angle(s[1:])))
        return as_unimodular(complex(s.replace("i", "j").replace(" ", "")))
    except ValueError as exc:
        raise UsageError(f"bad --lambda {text!r}: {exc}") from None


def load_model(target: str | None, poly_path: str | None) -> RIFModel:
    """Resolve a catalog name or a polynomial JSON file.

    The JSON is either the polynomial format (``nvars``, ``degree``,
    ``terms``) or ``{"nvars": 3, "degree": [1, 1, 1], "denominator": "3 - z1 - z2 - z3"}``.
    """
    path = poly_path or (target if target and target.endswith(".json") else None)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read polynomial file {path}: {exc}") from None
        if "denominator" in data:
            p = parse_poly(data["denominator"], int(data["nvars"]), data.get("degree"))
        else:
            p = MultiPoly.from_json_dict(data)
        return make_rif(p, data.get("degree"), name=Path(path).stem)
    if not target:
        raise UsageError("a catalog name or --poly file is required")
    try:
        return catalog(target)
    except UnknownExample as exc:
        raise UsageError(str(exc)) from None


def report_schema() -> dict:
    """JSON schema of the ``analyze`` report shipped with the package."""
    from importlib.resources import files

    return json.loads(files("rif_forge").joinpath("schemas/analysis_report.schema.json")
                      .read_text())


def _threads(args) -> int:
    from .sampling import default_threads

    return args.threads if args.threads else default_threads()


def _emit(args, payload) -> None:
    text = json.dumps(payload, indent=2, default=_json_default)
    if args.json and args.json != "-":
        Path(args.json).write_text(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def _csv_dir(args) -> Path | None:
    if not args.csv_dir:
        return None
    d = Path(args.csv_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ----------------------------------------------------------------- commands

def cmd_catalog(args) -> int:
    entries = catalog_entries()
    if args.json:
        _emit(args, [{"name": e.name, "degree": list(e.degree), "family": e.family}
                     for e in entries])
        return EXIT_OK
    for e in entries:
        deg = "(" + ",".join(map(str, e.degree)) + ")"
        print(f"{e.name:<14} {deg:<10} {e.family:<14} {e.summary}")
    print("phi_d(d)       (1,...,1)  canonical      any d >= 2 by name, e.g. phi_d(4)")
    return EXIT_OK


def cmd_scan(args) -> int:
    from .scan import singular_scan

    r = load_model(args.target, args.poly)
    scan = singular_scan(r)
    if args.json:
        _emit(args, scan.to_json_dict())
    else:
        print(f"{r.name}: {len(scan.points)} refined torus zeros, {len(scan)} components")
        for k, c in enumerate(scan.components):
            center = ", ".join(f"{x:+.4f}" for x in c.center)
            print(f"  [{k}] dimension {c.dimension}  points {len(c.indices):5d}  "
                  f"center ({center})  extent {c.extent:.3f}")
    return EXIT_OK


def _integrability_reports(r, args, variables, scan):
    from .fitting import integrability
    from .sampling import parse_local

    local = parse_local(args.local) if args.local else None
    reports = []
    for j in variables:
        rep = integrability(r, j, samples=args.samples, seed=args.seed, local=local,
                            threads=_threads(args), scan=scan, method=args.method)
        reports.append(rep)
    return reports


def cmd_integrability(args) -> int:
    from .scan import singular_scan

    r = load_model(args.target, args.poly)
    if args.var is None:
        raise UsageError("integrability needs --var")
    if not 1 <= args.var <= r.nvars:
        raise UsageError(f"--var must be between 1 and {r.nvars}")
    scan = singular_scan(r)
    t0 = time.perf_counter()
    rep = _integrability_reports(r, args, [args.var], scan)[0]
    out = rep.to_json_dict()
    out["seed"] = args.seed
    out["samples"] = args.samples
    out["seconds"] = round(time.perf_counter() - t0, 3)
    if args.csv_dir:
        from .sampling import parse_local, sample_delta

        local = parse_local(args.local) if args.local else None
        prof = sample_delta(r, args.var, "stratified", args.samples, args.seed, local=local,
                            scan=scan, threads=_threads(args))
        prof.to_csv(_csv_dir(args) / f"{_slug(r)}_delta_var{args.var}.csv")
    _emit(args, out)
    return EXIT_FLAGGED if rep.flags else EXIT_OK


def cmd_newton(args) -> int:
    from .newton import greenblatt_classify, rho_series

    r = load_model(args.target, args.poly)
    center = _angle_strings(args.center or "0,0", 2, "--center")
    rep = greenblatt_classify(rho_series(r, center, args.order))
    out = rep.to_json_dict()
    out["center"] = list(center)
    out["order"] = args.order
    _emit(args, out)
    return EXIT_FLAGGED if rep.truncation_warning or rep.warnings else EXIT_OK


def cmd_boundary(args) -> int:
    from .boundary import boundary_value

    r = load_model(args.target, args.poly)
    if not args.point:
        raise UsageError("boundary needs --point t1,t2,t3")
    point = _angles(args.point, 3, "--point")
    rep = boundary_value(r, point)
    _emit(args, rep.to_json_dict())
    return EXIT_FLAGGED if rep.alternative or rep.outliers or rep.injective is False else EXIT_OK


def _lambdas(args) -> list:
    from .levelsets import lambda_grid

    if args.lam:
        return [parse_lambda(s) for s in args.lam]
    return lambda_grid(args.lambda_count)


def _levelset_payload(r, lam, args, scan, csv_dir) -> tuple[dict, bool]:
    from .levelsets import level_set_sample, verify_cl_equals_ll

    sample = level_set_sample(r, lam, args.levelset_grid)
    summary = sample.summary()
    summary["notes"] = list(sample.notes)
    flagged = False
    if scan is not None and len(scan):
        dists = verify_cl_equals_ll(r, lam, scan, tol=args.tol, raise_on_fail=False)
        worst = max(e["distance"] for e in dists)
        summary["verify"] = {"tol": args.tol, "worst_distance": worst,
                             "checked_points": len(dists), "passed": bool(worst < args.tol)}
        flagged = worst >= args.tol
    if csv_dir is not None:
        name = f"{_slug(r)}_levelset_{np.angle(complex(lam)):+.6f}.csv"
        sample.to_csv(csv_dir / name)
        summary["csv"] = str(csv_dir / name)
    return summary, flagged


def cmd_levelset(args) -> int:
    from .scan import singular_scan

    r = load_model(args.target, args.poly)
    scan = singular_scan(r)
    csv_dir = _csv_dir(args)
    out, flagged = [], False
    for lam in _lambdas(args):
        summary, bad = _levelset_payload(r, lam, args, scan, csv_dir)
        out.append(summary)
        flagged |= bad
    _emit(args, out)
    return EXIT_FLAGGED if flagged else EXIT_OK


def _slug(r: RIFModel) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in (r.name or "model"))


def _snap(angle: float) -> str | float:
    """``"0"``/``"pi"`` for angles that are numerically 0 or pi."""
    a = float(np.angle(np.exp(1j * angle)))
    if abs(a) < 1e-6:
        return "0"
    if abs(abs(a) - np.pi) < 1e-6:
        return "pi"
    return a


def cmd_analyze(args) -> int:
    from .boundary import boundary_value
    from .newton import greenblatt_classify, rho_series
    from .rif import vertical_lines
    from .scan import singular_scan

    t0 = time.perf_counter()
    r = load_model(args.target, args.poly)
    scan = singular_scan(r)
    report = {
        "tool_version": __version__,
        "seed": args.seed,
        "model_summary": {"name": r.name, "degree": list(r.degree),
                          "denominator": str(r.p), "stability": r.stability.to_json_dict()},
        "singular_scan": scan.to_json_dict(),
    }
    flags = []
    variables = [args.var] if args.var else list(range(1, r.nvars + 1))
    integ = []
    for rep in _integrability_reports(r, args, variables, scan):
        integ.append(rep.to_json_dict())
        flags += [f"var{rep.variable}:{f}" for f in rep.flags]
    report["integrability"] = integ

    mn1 = r.nvars == 3 and r.degree[2] == 1
    newton = []
    if r.nvars == 3:
        for k, comp in enumerate(scan.components):
            if comp.dimension != 0:
                continue
            center = tuple(_snap(x) for x in comp.center[:2])
            entry = {"component": k, "center": list(center)}
            try:
                rep = greenblatt_classify(rho_series(r, center, args.order))
                entry["report"] = rep.to_json_dict()
            except MethodInapplicable as exc:
                entry["error"] = f"{type(exc).__name__}: {exc}"
                flags.append(f"newton[{k}]:{type(exc).__name__}")
            newton.append(entry)
    report["newton"] = newton

    if mn1:
        csv_dir = _csv_dir(args)
        levels = []
        for lam in _lambdas(args):
            try:
                summary, bad = _levelset_payload(r, lam, args, scan, csv_dir)
            except PsiSingular as exc:
                summary, bad = {"lambda": [complex(lam).real, complex(lam).imag],
                                "error": str(exc)}, True
            levels.append(summary)
            if bad:
                flags.append(f"levelset:{complex(lam):.4g}")
        report["level_sets"] = levels
        table = []
        pts = [comp.center for comp in scan.components]
        pts += [np.array([a, b, 0.0]) for a, b in vertical_lines(r).angles]
        for pt in pts:
            try:
                rep = boundary_value(r, tuple(float(x) for x in pt))
                table.append(rep.to_json_dict())
            except RifError as exc:
                table.append({"point": [float(x) for x in pt], "error": str(exc)})
                flags.append("boundary")
        report["boundary_values"] = table
    report["flags"] = flags
    report["timing_seconds"] = round(time.perf_counter() - t0, 3)
    _emit(args, report)
    return EXIT_FLAGGED if flags else EXIT_OK


# ---------------------------------------------------------------- plumbing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("target", nargs="?", help="catalog name or polynomial JSON file")
    common.add_argument("--poly", help="polynomial JSON file (instead of a catalog name)")
    common.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                        help="JSON output to stdout, or to PATH")
    common.add_argument("--csv-dir", dest="csv_dir", help="directory for CSV dumps")
    common.add_argument("--threads", type=int, default=0,
                        help="worker threads (default: RIF_FORGE_THREADS or 1)")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--var", type=int, help="variable index j (1-based)")
    sampling.add_argument("--samples", type=int, default=1_000_000,
                          help="delta samples per variable (default: 1e6)")
    sampling.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    sampling.add_argument("--method", choices=["fit", "direct", "both"], default="both",
                          help="decay fit, proxy integrals, or both (default)")
    sampling.add_argument("--local", help="restrict frozen angles to a box, e.g. 0,0 or pi,*")

    levels = argparse.ArgumentParser(add_help=False)
    levels.add_argument("--lambda", dest="lam", action="append",
                        help="unimodular level (1, -i, 0.6+0.8i or @pi/3); repeatable")
    levels.add_argument("--lambda-count", dest="lambda_count", type=int, default=16,
                        help="equally spaced levels when --lambda is absent (default: 16)")
    levels.add_argument("--levelset-grid", dest="levelset_grid", type=int, default=64,
                        help="mesh size per axis for surface samples (default: 64)")
    levels.add_argument("--tol", type=float, default=1e-3,
                        help="distance tolerance for the singular-set check (default: 1e-3)")

    order = argparse.ArgumentParser(add_help=False)
    order.add_argument("--order", type=int, default=8, help="Taylor truncation order (default: 8)")

    parser = argparse.ArgumentParser(
        prog="rif-forge",
        description="Integrability, Newton polygon and boundary analysis of rational inner "
                    "functions on the polydisk.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    sub.add_parser("catalog", parents=[common], help="list built-in examples")
    sub.add_parser("scan", parents=[common], help="torus zeros of the denominator")
    sub.add_parser("integrability", parents=[common, sampling],
                   help="critical L^p index of a partial derivative")
    p = sub.add_parser("newton", parents=[common, order],
                       help="Newton polygon and Greenblatt verdict of the density")
    p.add_argument("--center", help="expansion center t1,t2 (default: 0,0)")
    p = sub.add_parser("boundary", parents=[common], help="nontangential boundary value")
    p.add_argument("--point", help="torus point t1,t2,t3")
    sub.add_parser("levelset", parents=[common, levels], help="unimodular level sets")
    sub.add_parser("analyze", parents=[common, sampling, levels, order],
                   help="full report over all analyses")
    return parser


def _reorder(argv: list[str]) -> list[str]:
    """Accept ``ex_iso1 boundary ...`` as well as ``boundary ex_iso1 ...``."""
    if len(argv) >= 2 and argv[0] not in COMMANDS and not argv[0].startswith("-") \
            and argv[1] in COMMANDS:
        return [argv[1], argv[0]] + argv[2:]
    return argv


HANDLERS = {
    "catalog": cmd_catalog, "scan": cmd_scan, "integrability": cmd_integrability,
    "newton": cmd_newton, "boundary": cmd_boundary, "levelset": cmd_levelset,
    "analyze": cmd_analyze,
}


def main(argv: list[str] | None = None) -> int:
    argv = _reorder(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", 0) and args.threads < 0:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return HANDLERS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rif-forge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StabilityViolation as exc:
        witness = ", ".join(f"{z.real:.12g}{z.imag:+.12g}j" for z in exc.point)
        print(f"invalid model: {exc}\nwitness: ({witness})", file=sys.stderr)
        return EXIT_INVALID
    except InvalidModel as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except VerticalLineAtCenter as exc:
        print(f"method not applicable: a vertical line passes through the center, so the "
              f"density may be discontinuous there ({exc})", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except MethodInapplicable as exc:
        print(f"method not applicable: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FLAGGED


if __name__ == "__main__":
    sys.exit(main())
