"""Command-line pipeline: generate, solve, certify, report.

Each configuration gets a content-addressed job directory under the output
root: job-<12 hex of sha256 over the defining parameters>.  `gen` writes the
sparse problem and its exact sidecar there, `solve` runs the configured
solver, `certify` replays the lineage and writes report.json, `all` chains
the three.  `report` tabulates every report.json found under the output
root, optionally against the published reference values.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from .certify import certify, decimal_string, write_report
from .sdpbuild import ProblemConfig, apply_lambda_shift, assemble
from .solverio import (
    DEFAULT_SIG_DIGITS,
    SolverConfig,
    SolverFailedError,
    SolverNotFoundError,
    SolverTimeoutError,
    emit,
    parse,
    read_sidecar,
    resolve_solver,
    run,
    solved_objective,
)

# published reference upper bounds (and best known lower bounds) for the
# kissing problem, keyed by (sphere dimension, truncation degree)
REFERENCE_UPPER_BOUNDS: dict[tuple[int, int], str] = {
    (3, 14): "12.381921", (3, 15): "12.374682", (3, 16): "12.368591",
    (4, 14): "24.066298", (4, 15): "24.062758", (4, 16): "24.056903",
    (5, 14): "44.999047", (5, 15): "44.987727", (5, 16): "44.981067",
    (6, 14): "78.240781", (6, 15): "78.212731", (6, 16): "78.187761",
    (7, 14): "134.456246", (7, 15): "134.330898", (7, 16): "134.270201",
    (9, 14): "364.104934", (9, 15): "363.888016", (9, 16): "363.675154",
    (10, 14): "554.522392", (10, 15): "554.225840", (10, 16): "553.827497",
    (11, 14): "870.908146", (11, 15): "869.874183", (11, 16): "869.244985",
    (12, 14): "1357.934329", (12, 15): "1357.118955", (12, 16): "1356.603728",
    (13, 14): "2069.675634", (13, 15): "2067.388613", (13, 16): "2066.405173",
    (14, 14): "3183.348148", (14, 15): "3180.112464", (14, 16): "3177.917052",
    (15, 14): "4866.795537", (15, 15): "4862.382161", (15, 16): "4858.505436",
    (16, 14): "7356.238006", (16, 15): "7341.324655", (16, 16): "7332.776399",
    (17, 14): "11073.844334", (17, 15): "11030.170254", (17, 16): "11014.183845",
    (18, 14): "16575.934858", (18, 15): "16489.848647", (18, 16): "16469.090329",
    (19, 14): "24819.810569", (19, 15): "24654.968481", (19, 16): "24575.871259",
    (20, 14): "36761.630730", (20, 15): "36522.436885", (20, 16): "36402.675795",
    (21, 14): "54579.036297", (21, 15): "54069.067238", (21, 16): "53878.722941",
    (22, 14): "82338.035075", (22, 15): "81688.317095", (22, 16): "81376.459564",
    (23, 14): "124509.320059", (23, 15): "123756.492951", (23, 16): "123328.397290",
}

KISSING_LOWER_BOUNDS: dict[int, int] = {
    3: 12, 4: 24, 5: 40, 6: 72, 7: 126, 9: 306, 10: 500, 11: 582, 12: 840,
    13: 1154, 14: 1606, 15: 2564, 16: 4320, 17: 5346, 18: 7398, 19: 10668,
    20: 17400, 21: 27720, 22: 49896, 23: 93150,
}


def parse_rational(s: str, what: str) -> Fraction:
    if s == "kissing":
        return Fraction(1, 2)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as e:
        raise SystemExit(f"error: cannot read {what} {s!r} as a rational") from e


def _merged_settings(args) -> dict:
    """Config-file values overlaid by explicitly given CLI flags."""
    settings = {
        "n": None,
        "d": None,
        "cos_theta": "kissing",
        "lambda_min": "1/100000000",
        "mode": "reduced",
        "solver_cmd": "auto",
        "precision_bits": 212,
        "timeout": None,
        "out_dir": "runs",
        "emit_digits": DEFAULT_SIG_DIGITS,
    }
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise SystemExit(f"error: cannot read config file: {e}") from e
        unknown = set(loaded) - set(settings)
        if unknown:
            raise SystemExit(f"error: unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    for key in settings:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    return settings


def _problem_config(settings) -> ProblemConfig:
    if settings["n"] is None or settings["d"] is None:
        raise SystemExit("error: --n and --d are required (flag or config file)")
    if settings["mode"] not in ("reduced", "monomial"):
        raise SystemExit(f"error: unknown mode {settings['mode']!r}")
    try:
        return ProblemConfig(
            n=int(settings["n"]),
            d=int(settings["d"]),
            cos_theta=parse_rational(str(settings["cos_theta"]), "cos-theta"),
            lambda_min=parse_rational(str(settings["lambda_min"]), "lambda-min"),
            reduced=settings["mode"] == "reduced",
        )
    except (ValueError, TypeError) as e:
        raise SystemExit(f"error: {e}") from e


def job_dir(settings) -> Path:
    cfg = _problem_config(settings)
    key = json.dumps(
        {
            "n": cfg.n,
            "d": cfg.d,
            "cos_theta": str(cfg.cos_theta),
            "lambda_min": str(cfg.lambda_min),
            "mode": cfg.mode,
            "precision_bits": int(settings["precision_bits"]),
        },
        sort_keys=True,
    )
    tag = hashlib.sha256(key.encode()).hexdigest()[:12]
    return Path(settings["out_dir"]) / f"job-{tag}"


def _emit_json(args, payload: dict):
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=1))


# ---------------------------------------------------------------------------
# stages

def cmd_gen(args) -> int:
    settings = _merged_settings(args)
    cfg = _problem_config(settings)
    jd = job_dir(settings)
    jd.mkdir(parents=True, exist_ok=True)

    problem = apply_lambda_shift(assemble(cfg), cfg.lambda_min)
    dat, sidecar = emit(
        problem, jd / "problem.dat-s", int(settings["emit_digits"])
    )
    (jd / "job.json").write_text(
        json.dumps(
            {
                "n": cfg.n,
                "d": cfg.d,
                "cos_theta": str(cfg.cos_theta),
                "lambda_min": str(cfg.lambda_min),
                "mode": cfg.mode,
                "precision_bits": int(settings["precision_bits"]),
            },
            indent=1,
        )
        + "\n"
    )
    nblocks = len(problem.blocks)
    nrows = len(problem.rows)
    print(f"gen: {jd}  ({nrows} rows, {nblocks} blocks)")
    _emit_json(
        args,
        {
            "stage": "gen",
            "job_dir": str(jd),
            "problem": str(dat),
            "sidecar": str(sidecar),
            "rows": nrows,
            "blocks": nblocks,
        },
    )
    return 0


def cmd_solve(args) -> int:
    settings = _merged_settings(args)
    jd = job_dir(settings)
    dat = jd / "problem.dat-s"
    sidecar = jd / "problem.dat-s.meta.json"
    if not dat.exists() or not sidecar.exists():
        raise SystemExit(f"error: no generated problem in {jd}; run gen first")

    solver_cfg = SolverConfig(
        command=settings["solver_cmd"],
        precision_bits=int(settings["precision_bits"]),
        timeout=float(settings["timeout"]) if settings["timeout"] else None,
    )
    resolved = resolve_solver(solver_cfg)
    print(
        f"solve: {resolved.name}"
        + ("" if resolved.high_precision else " (double precision)")
    )
    try:
        out = run(solver_cfg, dat, jd / "solver.out")
    except (SolverNotFoundError, SolverFailedError, SolverTimeoutError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    metadata = read_sidecar(sidecar)
    sol = parse(out, metadata.problem)
    obj = solved_objective(sol, metadata.problem)
    obj_str = "unknown" if obj is None else decimal_string(obj, 15)
    print(f"solve: phase {sol.phase}, objective {obj_str}")
    _emit_json(
        args,
        {
            "stage": "solve",
            "job_dir": str(jd),
            "solver": resolved.name,
            "high_precision": resolved.high_precision,
            "phase": sol.phase,
            "objective": obj_str,
        },
    )
    return 0


def cmd_certify(args) -> int:
    settings = _merged_settings(args)
    jd = job_dir(settings)
    out = jd / "solver.out"
    sidecar = jd / "problem.dat-s.meta.json"
    if not out.exists():
        raise SystemExit(f"error: no solver output in {jd}; run solve first")
    metadata = read_sidecar(sidecar)
    sol = parse(out, metadata.problem)
    result = certify(sol, metadata, int(settings["precision_bits"]))
    write_report(result, jd / "report.json")
    if result.status == "certified":
        print(
            f"certify: certified upper bound {result.bound_decimal}"
            f"  (exact {result.bound})"
        )
    else:
        print(f"certify: {result.status}; see {jd / 'report.json'}")
        for note in result.report.notes:
            print(f"  {note}")
    _emit_json(args, {"stage": "certify", **result.to_report_dict()})
    return 0


def cmd_all(args) -> int:
    rc = cmd_gen(args)
    if rc:
        return rc
    rc = cmd_solve(args)
    if rc:
        return rc
    return cmd_certify(args)


def cmd_report(args) -> int:
    settings = _merged_settings(args)
    root = Path(settings["out_dir"])
    rows = []
    for path in sorted(root.glob("job-*/report.json")):
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        rows.append((doc, path.parent.name))
    if not rows:
        print(f"report: no certification reports under {root}")
        return 0
    rows.sort(key=lambda r: (r[0]["n"], r[0]["d"], r[0]["mode"]))

    published = getattr(args, "published", False)
    header = ["n", "d", "mode", "status", "bound"]
    if published:
        header += ["published", "delta"]
    header += ["job"]
    table = [header]
    payload = []
    for doc, job in rows:
        bound = doc.get("certified_bound_decimal")
        line = [
            str(doc["n"]),
            str(doc["d"]),
            doc["mode"],
            doc["status"],
            "-" if bound is None else bound[:14],
        ]
        ref = REFERENCE_UPPER_BOUNDS.get((doc["n"], doc["d"]))
        if published:
            if ref and bound is not None:
                delta = Fraction(doc["certified_bound_rational"]) - Fraction(ref)
                line += [ref, f"{float(delta):+.2e}"]
            else:
                line += ["-", "-"]
        line += [job]
        table.append(line)
        payload.append({**doc, "job": job, "published": ref})

    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    for r in table:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    _emit_json(args, {"stage": "report", "rows": payload})
    return 0


# ---------------------------------------------------------------------------

def _add_shared(p: argparse.ArgumentParser, need_size: bool):
    p.add_argument("--config", help="JSON file with defaults for these flags")
    p.add_argument("--n", type=int, required=False, help="sphere dimension (>= 3)")
    p.add_argument("--d", type=int, required=False, help="truncation degree (>= 1)")
    p.add_argument(
        "--cos-theta",
        dest="cos_theta",
        help="cosine of the minimal angle, a rational like 1/2, or 'kissing'",
    )
    p.add_argument(
        "--lambda-min",
        dest="lambda_min",
        help="interior margin the solver must keep (rational, default 1e-8)",
    )
    p.add_argument("--mode", choices=("reduced", "monomial"))
    p.add_argument("--solver-cmd", dest="solver_cmd", help="solver command or 'auto'")
    p.add_argument("--precision-bits", dest="precision_bits", type=int)
    p.add_argument("--timeout", type=float, help="solver wall-clock limit, seconds")
    p.add_argument("--out-dir", dest="out_dir", help="output root (default runs/)")
    p.add_argument("--json", action="store_true", help="also print machine-readable JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kissbound",
        description="certified rational upper bounds for spherical codes",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, blurb in (
        ("gen", cmd_gen, "assemble the SDP and write the sparse problem file"),
        ("solve", cmd_solve, "run the configured solver on a generated job"),
        ("certify", cmd_certify, "turn solver output into an exact certificate"),
        ("all", cmd_all, "gen + solve + certify"),
        ("report", cmd_report, "tabulate certification reports"),
    ):
        p = sub.add_parser(name, help=blurb)
        _add_shared(p, need_size=name != "report")
        if name == "report":
            p.add_argument(
                "--published",
                action="store_true",
                help="compare with the published reference bounds",
            )
        p.set_defaults(fn=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
