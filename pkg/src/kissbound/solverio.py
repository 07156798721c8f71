"""Sparse-format emission, solver subprocess handling, and output parsing.

The emitted file is the classic sparse block format: header of counts, block
structure line (negative size = diagonal block), right-hand-side vector, then
one line per nonzero `matno blockno i j value` with matno 0 the cost matrix
and i <= j (upper triangle, symmetric fill implied).  Our minimization
problem maps onto the format's dual side: the solver maximizes <F_0, Y>, so
the cost matrix is emitted as the *negated* objective functional and the
bound is recovered as objective_constant - objValDual.

Every rational is written as a decimal string with a fixed number of
significant digits (round-half-even), which keeps emission deterministic:
same problem, same bytes.  A JSON sidecar written next to the problem file
carries the exact rational rows, the block layout, the configuration, and a
hash of the emitted bytes, so later stages can re-derive and cross-check the
lineage instead of trusting floating-point round trips.
"""

from __future__ import annotations

import hashlib
import json
import re
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .sdpbuild import Block, Entry, ProblemConfig, Row, SdpProblem

SIDECAR_FORMAT = "kissbound-sidecar-1"
DEFAULT_SIG_DIGITS = 64


class SolverNotFoundError(RuntimeError):
    """No usable solver executable could be resolved."""


class SolverFailedError(RuntimeError):
    """The solver ran but did not produce a usable answer."""


class SolverTimeoutError(RuntimeError):
    """The solver exceeded the configured wall-clock budget."""


# ---------------------------------------------------------------------------
# deterministic decimal formatting

def format_decimal(x: Fraction, sig_digits: int = DEFAULT_SIG_DIGITS) -> str:
    """Scientific-notation decimal string, exact round-half-even rounding."""
    if sig_digits < 1:
        raise ValueError("need at least one significant digit")
    x = Fraction(x)
    if x == 0:
        return "0.0"
    sign = "-" if x < 0 else ""
    mag = -x if x < 0 else x
    e10 = len(str(mag.numerator)) - len(str(mag.denominator))
    while 10**e10 > mag:
        e10 -= 1
    while 10 ** (e10 + 1) <= mag:
        e10 += 1
    mantissa = round(mag / Fraction(10) ** (e10 - sig_digits + 1))
    if mantissa >= 10**sig_digits:  # rounding rolled over, e.g. 9.99 -> 10.0
        mantissa //= 10
        e10 += 1
    digits = str(mantissa).rstrip("0") or "0"
    head, tail = digits[0], digits[1:] or "0"
    return f"{sign}{head}.{tail}e{e10:+03d}"


def parse_decimal(s: str) -> Fraction:
    """Exact rational value of a decimal/scientific token."""
    return Fraction(s.replace("d", "e").replace("D", "E"))


# ---------------------------------------------------------------------------
# emission

def _sdpa_dim(b: Block) -> int:
    return -b.dim if b.kind == "diag" else b.dim


def emit(
    problem: SdpProblem,
    dat_path: str | Path,
    sig_digits: int = DEFAULT_SIG_DIGITS,
) -> tuple[Path, Path]:
    """Write the sparse problem file and its exact sidecar.

    Returns (problem path, sidecar path).  Deterministic: entries are sorted,
    values are fixed-precision decimal.
    """
    dat_path = Path(dat_path)
    cfg = problem.config
    block_index = {b.name: i + 1 for i, b in enumerate(problem.blocks)}

    def entry_lines(matno: int, entries: dict[Entry, Fraction], negate: bool):
        keyed = sorted(
            ((block_index[b], r, s, v) for (b, r, s), v in entries.items() if v)
        )
        for blk, r, s, v in keyed:
            val = -v if negate else v
            yield f"{matno} {blk} {r + 1} {s + 1} {format_decimal(val, sig_digits)}"

    lines = [
        f"* kissbound n={cfg.n} d={cfg.d} cos_theta={cfg.cos_theta} "
        f"mode={cfg.mode} lambda_min={cfg.lambda_min}",
        f"{len(problem.rows)} = mDIM",
        f"{len(problem.blocks)} = nBLOCK",
        "{" + ", ".join(str(_sdpa_dim(b)) for b in problem.blocks) + "}",
        " ".join(format_decimal(r.rhs, sig_digits) for r in problem.rows),
    ]
    lines.extend(entry_lines(0, problem.objective, negate=True))
    for i, row in enumerate(problem.rows, start=1):
        lines.extend(entry_lines(i, row.entries, negate=False))
    data = ("\n".join(lines) + "\n").encode()
    dat_path.write_bytes(data)

    sidecar_path = dat_path.with_name(dat_path.name + ".meta.json")
    write_sidecar(problem, sidecar_path, hashlib.sha256(data).hexdigest())
    return dat_path, sidecar_path


# ---------------------------------------------------------------------------
# the exact sidecar

def _frac_str(x: Fraction) -> str:
    return str(Fraction(x))


def write_sidecar(problem: SdpProblem, path: str | Path, problem_sha256: str) -> Path:
    cfg = problem.config
    doc = {
        "format": SIDECAR_FORMAT,
        "config": {
            "n": cfg.n,
            "d": cfg.d,
            "cos_theta": _frac_str(cfg.cos_theta),
            "lambda_min": _frac_str(cfg.lambda_min),
            "mode": cfg.mode,
        },
        "blocks": [
            {"name": b.name, "dim": b.dim, "kind": b.kind} for b in problem.blocks
        ],
        "objective": {
            "constant": _frac_str(problem.objective_constant),
            "entries": [
                [b, r, s, _frac_str(v)]
                for (b, r, s), v in sorted(problem.objective.items())
            ],
        },
        "rows": [
            {
                "label": row.label,
                "rhs": _frac_str(row.rhs),
                "entries": [
                    [b, r, s, _frac_str(v)]
                    for (b, r, s), v in sorted(row.entries.items())
                ],
            }
            for row in problem.rows
        ],
        "problem_sha256": problem_sha256,
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


@dataclass
class ProblemMetadata:
    """Exact problem as recorded at emission time, plus lineage hash."""

    problem: SdpProblem
    problem_sha256: str


def read_sidecar(path: str | Path) -> ProblemMetadata:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != SIDECAR_FORMAT:
        raise ValueError(f"unrecognized sidecar format in {path}")
    c = doc["config"]
    cfg = ProblemConfig(
        n=int(c["n"]),
        d=int(c["d"]),
        cos_theta=Fraction(c["cos_theta"]),
        lambda_min=Fraction(c["lambda_min"]),
        reduced=(c["mode"] == "reduced"),
    )
    blocks = tuple(
        Block(b["name"], int(b["dim"]), b["kind"]) for b in doc["blocks"]
    )
    rows = [
        Row(
            r["label"],
            {(b, int(i), int(j)): Fraction(v) for b, i, j, v in r["entries"]},
            Fraction(r["rhs"]),
        )
        for r in doc["rows"]
    ]
    objective = {
        (b, int(i), int(j)): Fraction(v)
        for b, i, j, v in doc["objective"]["entries"]
    }
    problem = SdpProblem(
        config=cfg,
        blocks=blocks,
        rows=rows,
        objective=objective,
        objective_constant=Fraction(doc["objective"]["constant"]),
    )
    return ProblemMetadata(problem, doc["problem_sha256"])


# ---------------------------------------------------------------------------
# reading problem files back (round trips, and the bundled solver's input)

@dataclass
class ParsedProblem:
    m: int
    dims: list[int]  # negative = diagonal block
    rhs: list[Fraction]
    entries: list[tuple[int, int, int, int, Fraction]]  # matno blk i j value


_NUM = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eEdD][-+]?\d+)?")


def read_problem(path: str | Path) -> ParsedProblem:
    tokens: list[str] = []
    for line in Path(path).read_text().splitlines():
        if line.lstrip().startswith(("*", '"')):
            continue
        line = line.split("=")[0] if "=" in line else line
        tokens.extend(_NUM.findall(line))
    if len(tokens) < 2:
        raise ValueError(f"{path}: not a sparse problem file")
    m, nblock = int(tokens[0]), int(tokens[1])
    dims = [int(float(t)) for t in tokens[2 : 2 + nblock]]
    rhs_lo = 2 + nblock
    rhs = [parse_decimal(t) for t in tokens[rhs_lo : rhs_lo + m]]
    rest = tokens[rhs_lo + m :]
    if len(rhs) != m or len(rest) % 5:
        raise ValueError(
            f"{path}: malformed stream ({len(rhs)} rhs values, "
            f"{len(rest)} trailing tokens)"
        )
    entries = [
        (
            int(rest[i]),
            int(rest[i + 1]),
            int(rest[i + 2]),
            int(rest[i + 3]),
            parse_decimal(rest[i + 4]),
        )
        for i in range(0, len(rest), 5)
    ]
    return ParsedProblem(m, dims, rhs, entries)


# ---------------------------------------------------------------------------
# running a solver

SDPA_CANDIDATES = ("sdpa_gmp", "sdpa_dd", "sdpa_qd", "sdpa")
_HIGH_PRECISION_MARKERS = ("gmp", "dd", "qd")


@dataclass
class SolverConfig:
    """How to invoke the external solver.

    command: "auto" probes PATH for the multiprecision family and falls back
    to the bundled double-precision solver; anything else is a shell-style
    template, with optional {input} {output} {params} placeholders (without
    placeholders, `-ds <input> -o <output> [-p <params>]` is appended).
    """

    command: str | list = "auto"
    params_file: str | None = None
    precision_bits: int = 212
    timeout: float | None = None


@dataclass
class ResolvedSolver:
    argv: list
    name: str
    high_precision: bool
    bundled: bool = False


def resolve_solver(config: SolverConfig) -> ResolvedSolver:
    cmd = config.command
    if cmd == "auto":
        for cand in SDPA_CANDIDATES:
            found = shutil.which(cand)
            if found:
                return ResolvedSolver(
                    [found],
                    cand,
                    any(m in cand for m in _HIGH_PRECISION_MARKERS),
                )
        return ResolvedSolver(
            [sys.executable, "-m", "kissbound.dpsolve"],
            "bundled-dpsolve",
            False,
            bundled=True,
        )
    argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
    if not argv:
        raise SolverNotFoundError("empty solver command")
    name = Path(argv[0]).name
    return ResolvedSolver(
        argv, name, any(m in name for m in _HIGH_PRECISION_MARKERS)
    )


def write_params_file(path: str | Path, precision_bits: int, high_precision: bool) -> Path:
    """Best-effort classic parameter file for the sdpa family."""
    eps = "1.0E-30" if high_precision else "1.0E-8"
    lines = [
        "200     unsigned int maxIteration;",
        f"{eps} double 0.0 < epsilonStar;",
        "1.0E4   double 0.0 < lambdaStar;",
        "2.0     double 1.0 < omegaStar;",
        "-1.0E5  double lowerBound;",
        "1.0E5   double upperBound;",
        "0.1     double 0.0 <= betaStar <= 1.0;",
        "0.3     double 0.0 <= betaBar <= 1.0, betaStar <= betaBar;",
        "0.9     double 0.0 < gammaStar < 1.0;",
        f"{eps} double 0.0 < epsilonDash;",
    ]
    if high_precision:
        lines.append(f"{precision_bits} precision")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def run(
    config: SolverConfig, dat_path: str | Path, out_path: str | Path
) -> Path:
    """Run the configured solver on dat_path, producing out_path.

    Raises SolverNotFoundError / SolverTimeoutError / SolverFailedError; on
    success the raw output file exists and is nonempty.  stdout+stderr go to
    `<out_path>.log`.
    """
    # The solver runs with cwd = the problem directory, so both paths must
    # be absolute or they would be re-resolved against that directory.
    dat_path, out_path = Path(dat_path).resolve(), Path(out_path).resolve()
    resolved = resolve_solver(config)

    params = config.params_file
    if params is None and not resolved.bundled:
        params = str(
            write_params_file(
                dat_path.with_name("param.sdpa"),
                config.precision_bits,
                resolved.high_precision,
            )
        )

    argv = [str(a) for a in resolved.argv]
    if any("{input}" in a or "{output}" in a for a in argv):
        argv = [
            a.replace("{input}", str(dat_path))
            .replace("{output}", str(out_path))
            .replace("{params}", params or "")
            for a in argv
        ]
        argv = [a for a in argv if a]
    else:
        argv += ["-ds", str(dat_path), "-o", str(out_path)]
        if params:
            argv += ["-p", params]

    log_path = out_path.with_name(out_path.name + ".log")
    try:
        proc = subprocess.run(
            argv,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            timeout=config.timeout,
            cwd=str(dat_path.parent),
        )
    except FileNotFoundError as e:
        raise SolverNotFoundError(f"solver executable not found: {argv[0]}") from e
    except subprocess.TimeoutExpired as e:
        log_path.write_bytes(e.stdout or b"")
        raise SolverTimeoutError(
            f"solver exceeded {config.timeout}s on {dat_path.name}"
        ) from e
    log_path.write_bytes(proc.stdout or b"")
    if proc.returncode != 0:
        tail = (proc.stdout or b"").decode(errors="replace")[-2000:]
        raise SolverFailedError(
            f"solver exited with {proc.returncode} on {dat_path.name}:\n{tail}"
        )
    if not out_path.exists() or not out_path.stat().st_size:
        raise SolverFailedError(
            f"solver produced no output file at {out_path} (see {log_path})"
        )
    return out_path


# ---------------------------------------------------------------------------
# parsing solver output

@dataclass
class Solution:
    """Solver answer lifted to exact rationals, keyed by block name.

    Diagonal blocks are stored as full square matrices (off-diagonal zero);
    PSD blocks are exactly symmetrized, (X + X^T)/2, at parse time.
    """

    blocks: dict[str, list[list[Fraction]]]
    objective_primal: Fraction | None
    objective_dual: Fraction | None
    phase: str

    def a_values(self) -> list[Fraction]:
        return [row[i] for i, row in enumerate(self.blocks["a"])]

    def b_entries(self) -> tuple[Fraction, Fraction, Fraction]:
        b = self.blocks["B"]
        return b[0][0], b[0][1], b[1][1]


def _matching_brace_span(text: str, start: int) -> tuple[int, int]:
    lo = text.index("{", start)
    depth = 0
    for i in range(lo, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return lo, i + 1
    raise ValueError("unbalanced braces in solver output")


def _scalar_after(text: str, key: str) -> Fraction | None:
    m = re.search(rf"{key}\s*=\s*([^\s,;}}]+)", text)
    if not m:
        return None
    try:
        return parse_decimal(m.group(1))
    except (ValueError, ZeroDivisionError):
        return None


def parse(out_path: str | Path, problem: SdpProblem) -> Solution:
    """Read a solver output file against the expected block layout."""
    text = Path(out_path).read_text()
    phase_m = re.search(r"phase\.value\s*=\s*(\S+)", text)
    phase = phase_m.group(1) if phase_m else "unknown"
    primal = _scalar_after(text, "objValPrimal")
    dual = _scalar_after(text, "objValDual")

    anchor = text.rfind("yMat")
    if anchor < 0:
        raise SolverFailedError(f"{out_path}: no yMat section in solver output")
    lo, hi = _matching_brace_span(text, anchor)
    tokens = [parse_decimal(t) for t in _NUM.findall(text[lo:hi])]

    as_vector = sum(
        b.dim if b.kind == "diag" else b.dim * b.dim for b in problem.blocks
    )
    as_matrix = sum(b.dim * b.dim for b in problem.blocks)
    if len(tokens) == as_vector:
        diag_is_vector = True
    elif len(tokens) == as_matrix:
        diag_is_vector = False
    else:
        raise SolverFailedError(
            f"{out_path}: yMat holds {len(tokens)} values; expected "
            f"{as_vector} (diagonal blocks as vectors) or {as_matrix} (full)"
        )

    blocks: dict[str, list[list[Fraction]]] = {}
    pos = 0
    for b in problem.blocks:
        if b.kind == "diag" and diag_is_vector:
            vals = tokens[pos : pos + b.dim]
            pos += b.dim
            mat = [
                [vals[i] if i == j else Fraction(0) for j in range(b.dim)]
                for i in range(b.dim)
            ]
        else:
            vals = tokens[pos : pos + b.dim * b.dim]
            pos += b.dim * b.dim
            raw = [vals[i * b.dim : (i + 1) * b.dim] for i in range(b.dim)]
            if b.kind == "diag":
                mat = [
                    [raw[i][i] if i == j else Fraction(0) for j in range(b.dim)]
                    for i in range(b.dim)
                ]
            else:
                mat = [
                    [(raw[i][j] + raw[j][i]) / 2 for j in range(b.dim)]
                    for i in range(b.dim)
                ]
        blocks[b.name] = mat
    return Solution(blocks, primal, dual, phase)


def write_solution(
    sol: Solution,
    problem: SdpProblem,
    path: str | Path,
    sig_digits: int = 17,
) -> Path:
    """Serialize a Solution in the solver-output dialect parse() reads."""
    def fmt(x: Fraction) -> str:
        return format_decimal(x, sig_digits)

    out = [f"phase.value  = {sol.phase}"]
    if sol.objective_primal is not None:
        out.append(f"objValPrimal = {fmt(sol.objective_primal)}")
    if sol.objective_dual is not None:
        out.append(f"objValDual   = {fmt(sol.objective_dual)}")
    out.append("xVec = \n{}")
    body = []
    for b in problem.blocks:
        mat = sol.blocks[b.name]
        if b.kind == "diag":
            body.append("{" + ",".join(fmt(mat[i][i]) for i in range(b.dim)) + "}")
        else:
            rows = [
                "{" + ",".join(fmt(v) for v in row) + "}" for row in mat
            ]
            body.append("{" + ",".join(rows) + "}")
    out.append("yMat = \n{\n" + ",\n".join(body) + "\n}")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path


def solved_objective(sol: Solution, problem: SdpProblem) -> Fraction | None:
    """The minimization objective value implied by the solver's dual value."""
    if sol.objective_dual is None:
        return None
    return problem.objective_constant - sol.objective_dual
