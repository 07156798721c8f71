"""Bundled double-precision solver speaking the sparse-file protocol.

This is the fallback backend for machines without a multiprecision solver on
PATH: it reads the same sparse problem file, solves the semidefinite program
with whatever conic solver cvxpy has available, and writes an output file in
the dialect `solverio.parse` reads.  Double precision only — certification
against its answers generally needs the degraded tolerances and may honestly
fail the rounding norm test at tight margins.

Usage mirrors the classic solvers:  dpsolve -ds problem.dat-s -o problem.out
(a -p parameter file is accepted and ignored).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .solverio import ParsedProblem, read_problem

_BACKENDS = ("CLARABEL", "CVXOPT", "SCS")


def _solve(prob: ParsedProblem, backend_order=_BACKENDS):
    import cvxpy as cp

    blocks = []
    for dim in prob.dims:
        if dim < 0:
            blocks.append(cp.Variable(-dim, nonneg=True))
        else:
            blocks.append(cp.Variable((dim, dim), PSD=True))

    def pairing(matno_entries):
        expr = 0
        for _, blk, i, j, val in matno_entries:
            x = blocks[blk - 1]
            v = float(val)
            if prob.dims[blk - 1] < 0:
                if i != j:
                    raise ValueError("off-diagonal entry in a diagonal block")
                expr = expr + v * x[i - 1]
            elif i == j:
                expr = expr + v * x[i - 1, i - 1]
            else:
                expr = expr + 2 * v * x[i - 1, j - 1]
        return expr

    per_mat: dict[int, list] = {}
    for e in prob.entries:
        per_mat.setdefault(e[0], []).append(e)

    constraints = [
        pairing(per_mat.get(i, [])) == float(prob.rhs[i - 1])
        for i in range(1, prob.m + 1)
    ]
    objective = cp.Maximize(pairing(per_mat.get(0, [])))
    problem = cp.Problem(objective, constraints)

    tight = {
        "CLARABEL": dict(
            tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12, max_iter=400
        ),
        "CVXOPT": dict(abstol=1e-10, reltol=1e-10, feastol=1e-10),
        "SCS": dict(eps=1e-10, max_iters=200_000),
    }
    last_err = None
    for backend in backend_order:
        if backend not in cp.installed_solvers():
            continue
        try:
            problem.solve(solver=backend, **tight.get(backend, {}))
        except (cp.error.SolverError, ValueError) as e:
            last_err = e
            continue
        if problem.value is not None and np.isfinite(problem.value):
            return problem, blocks, constraints, backend
        last_err = RuntimeError(f"{backend}: status {problem.status}")
    raise RuntimeError(f"no conic backend succeeded: {last_err}")


def _fmt(x: float) -> str:
    return f"{x:+.16e}"


def _write_output(path, prob: ParsedProblem, cp_problem, blocks, constraints):
    status = cp_problem.status
    phase = "pdOPT" if status == "optimal" else f"cvxpy-{status}"
    value = float(cp_problem.value)

    # equality multipliers play the role of the primal vector; the
    # certification path never consumes them, so their sign convention is
    # reported as the backend produced it
    xvec = []
    for c in constraints:
        dv = c.dual_value
        xvec.append(float(dv) if dv is not None else 0.0)

    chunks = []
    for dim, var in zip(prob.dims, blocks):
        val = var.value
        if dim < 0:
            vec = np.zeros(-dim) if val is None else np.asarray(val).reshape(-1)
            chunks.append("{" + ",".join(_fmt(v) for v in vec) + "}")
        else:
            mat = np.zeros((dim, dim)) if val is None else np.asarray(val)
            mat = (mat + mat.T) / 2
            rows = [
                "{" + ",".join(_fmt(v) for v in row) + "}" for row in mat
            ]
            chunks.append("{" + ",".join(rows) + "}")

    out = [
        f"phase.value  = {phase}",
        f"objValPrimal = {_fmt(value)}",
        f"objValDual   = {_fmt(value)}",
        "xVec = ",
        "{" + ",".join(_fmt(v) for v in xvec) + "}",
        "yMat = ",
        "{",
        ",\n".join(chunks),
        "}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="kissbound-dpsolve",
        description="double-precision sparse-format solver backend",
    )
    ap.add_argument("-ds", "--dense-sparse", dest="input", required=True)
    ap.add_argument("-o", "--output", dest="output", required=True)
    ap.add_argument("-p", "--params", dest="params", default=None)
    args = ap.parse_args(argv)

    prob = read_problem(args.input)
    try:
        cp_problem, blocks, constraints, backend = _solve(prob)
    except RuntimeError as e:
        print(f"dpsolve: {e}", file=sys.stderr)
        return 1
    _write_output(args.output, prob, cp_problem, blocks, constraints)
    print(f"dpsolve: solved with {backend}, objective {cp_problem.value:.12g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
