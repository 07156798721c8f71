"""Exact certification: floating solver output -> rational proven bound.

The solver returns approximately-feasible, approximately-PSD blocks for the
lambda-shifted problem.  Certification turns that into an exactly feasible
rational solution of the *unshifted* problem, whose objective value is then a
theorem, not a numeric:

1. undo the shift (X = X' + lambda_min I on every PSD block),
2. clip the scalar a_k at zero,
3. for each PSD block, find the largest floating Cholesky margin lambda with
   X - lambda I still factorizable, and replace X by the exact rational
   L L^T + lambda I (PSD by construction, within solver noise of X),
4. recompute both constraint identities exactly; the leftover polynomials are
   absorbed into the constant-multiplier blocks as symmetric corrections
   whose Frobenius norm must stay below the block's margin lambda — the one
   inequality separating "certified" from "norm-test-failed",
5. re-verify that both identities now hold *identically* (zero polynomial),
   and read off the bound 1 + sum a_k + b_11 + <all-ones, F_0>.

An input whose residuals already vanish identically (a hand-built rational
solution, or the repaired blocks of an earlier run) skips the floating steps
entirely: each block is verified PSD by exact rational LDL^T factorization
and the bound is the input's own objective, bit for bit.

Every failure mode is a named status or a raised error; there is no silent
acceptance path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath as mp

from .orthopoly import jacobi, s_matrix
from .poly import Mono, Poly, monomials_upto
from .sdpbuild import (
    ProblemConfig,
    SdpProblem,
    apply_lambda_shift,
    assemble,
    delta_system,
    included_multipliers,
)
from .solverio import (
    ProblemMetadata,
    Solution,
    format_decimal,
    solved_objective,
)
from .symmetry import (
    S3,
    orbit_coefficients,
    permute_mono,
    symmetry_adapted_basis,
    v_matrices,
)

RatMatrix = list[list[Fraction]]


class BlockShapeError(ValueError):
    """Solution blocks do not match the problem layout."""


class LineageError(ValueError):
    """Sidecar problem data disagrees with a fresh rebuild from the config."""


# ---------------------------------------------------------------------------
# exact <-> floating conversions

def mpf_to_fraction(x) -> Fraction:
    """Exact value of an mpf (every finite mpf is dyadic)."""
    sign, man, exp, _ = x._mpf_
    if man == 0:
        if x == 0:
            return Fraction(0)
        raise ValueError(f"non-finite value {x}")
    v = Fraction(man) * Fraction(2) ** exp
    return -v if sign else v


def fraction_to_mpf(x: Fraction):
    """Round a rational to the current working precision."""
    x = Fraction(x)
    return mp.mpf(x.numerator) / mp.mpf(x.denominator)


# ---------------------------------------------------------------------------
# small exact-matrix helpers

def mat_eq_dim(X: RatMatrix, dim: int, name: str):
    if len(X) != dim or any(len(r) != dim for r in X):
        raise BlockShapeError(f"block {name}: expected {dim}x{dim}")


def frobenius_norm_sq(X: RatMatrix) -> Fraction:
    return sum((v * v for row in X for v in row), Fraction(0))


def identity_times(dim: int, c: Fraction) -> RatMatrix:
    return [
        [c if i == j else Fraction(0) for j in range(dim)] for i in range(dim)
    ]


def mat_add(X: RatMatrix, Y: RatMatrix) -> RatMatrix:
    return [[a + b for a, b in zip(rx, ry)] for rx, ry in zip(X, Y)]


def reynolds_average(X: RatMatrix, monos: list[Mono]) -> RatMatrix:
    """Group-average a symmetric matrix over the monomial-permutation action.

    Preserves PSD-ness (average of congruences by permutation matrices) and
    exactly commutes with the S3 action afterwards.
    """
    index = {m: i for i, m in enumerate(monos)}
    n = len(monos)
    out = [[Fraction(0)] * n for _ in range(n)]
    for sigma in S3:
        perm = [index[permute_mono(sigma, m)] for m in monos]
        for i in range(n):
            row = X[i]
            target = out[perm[i]]
            for j in range(n):
                target[perm[j]] += row[j]
    return [[v / 6 for v in row] for row in out]


# ---------------------------------------------------------------------------
# Cholesky margin search and rationalization

def cholesky_floor(
    X: RatMatrix, precision_bits: int
) -> tuple[Fraction, RatMatrix] | None:
    """Largest floating margin lambda with X - lambda*I factorizable.

    Binary search between the last success and first failure, shrinking
    until hi <= 2*lo; returns (lambda, exact lower-triangular factor of
    X - lambda*I as computed at precision_bits).  None when X fails even at
    lambda = 0.  An absolute cutoff near the working precision stops the
    search when the true margin is essentially zero.
    """
    dim = len(X)
    if dim == 0:
        return Fraction(0), []
    with mp.workprec(precision_bits):
        A = mp.matrix(
            [[fraction_to_mpf(X[i][j]) for j in range(dim)] for i in range(dim)]
        )

        def attempt(lam):
            try:
                return mp.cholesky(A - lam * mp.eye(dim))
            except (ValueError, ZeroDivisionError):
                return None

        lo = mp.mpf(0)
        best = attempt(lo)
        if best is None:
            return None
        hi = min(A[i, i] for i in range(dim))
        if hi <= 0:
            # a PSD matrix with a nonpositive diagonal entry is only PSD if
            # that row is zero; the margin is zero
            hi = mp.mpf(0)
        cutoff = mp.mpf(2) ** (-precision_bits)
        while hi > 2 * lo and hi > cutoff:
            mid = (lo + hi) / 2
            got = attempt(mid)
            if got is None:
                hi = mid
            else:
                lo, best = mid, got
    lam = mpf_to_fraction(lo)
    L = [
        [mpf_to_fraction(best[i, j]) if j <= i else Fraction(0) for j in range(dim)]
        for i in range(dim)
    ]
    return lam, L


def rationalize(lam: Fraction, L: RatMatrix) -> RatMatrix:
    """Exactly PSD rational matrix L L^T + lam I."""
    dim = len(L)
    out = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(i + 1):
            s = sum((L[i][k] * L[j][k] for k in range(j + 1)), Fraction(0))
            out[i][j] = s
            out[j][i] = s
        out[i][i] += lam
    return out


def exact_psd(X: RatMatrix) -> bool:
    """Decide PSD-ness of a symmetric rational matrix in exact arithmetic.

    LDL^T elimination with max-diagonal pivoting; when every remaining
    diagonal entry is zero, PSD forces the whole trailing submatrix to
    vanish, so the semidefinite boundary is handled without square roots.
    """
    n = len(X)
    A = [row[:] for row in X]
    for k in range(n):
        piv = max(range(k, n), key=lambda i: A[i][i])
        if A[piv][piv] < 0:
            return False
        if A[piv][piv] == 0:
            return all(
                A[i][j] == 0 for i in range(k, n) for j in range(k, n)
            )
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            for row in A:
                row[k], row[piv] = row[piv], row[k]
        p = A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / p
            if not f:
                continue
            for j in range(k + 1, n):
                A[i][j] -= f * A[k][j]
    return True


# ---------------------------------------------------------------------------
# exact residual polynomials

def _pair_poly(matrix_entries, X: RatMatrix) -> Poly:
    """<P, X> for a symmetric polynomial matrix given as nested lists."""
    total = Poly()
    dim = len(X)
    for r in range(dim):
        for s in range(r, dim):
            p = matrix_entries[r][s]
            if not p:
                continue
            c = X[r][s] if r == s else 2 * X[r][s]
            if c:
                total = total + p * c
    return total


def residual_constraint_i(
    config: ProblemConfig, blocks: dict[str, RatMatrix], a_vals: list[Fraction]
) -> Poly:
    """The u-axis identity's defect: zero iff the identity holds exactly."""
    n, d = config.n, config.d
    total = Poly.const(1)  # the identity's right-hand side, moved left
    for k in range(1, d + 1):
        if a_vals[k - 1]:
            total = total + jacobi(k, n) * a_vals[k - 1]
    b = blocks["B"]
    total = total + Poly.const(2 * b[0][1] + b[1][1])
    shape = config.shape
    for k in range(d + 1):
        paired = _pair_poly(s_matrix(k, shape).entries, blocks[f"F{k}"])
        on_edge = paired.map_monomials(lambda m: (m[0] + m[1], 0, 0))
        total = total + on_edge * 3
    q0 = blocks["Q0"]
    for r in range(d + 1):
        for s in range(r, d + 1):
            c = q0[r][s] if r == s else 2 * q0[r][s]
            if c:
                total = total + Poly.monomial((r + s, 0, 0), c)
    q1 = blocks["Q1"]
    acc = Poly()
    for r in range(d):
        for s in range(r, d):
            c = q1[r][s] if r == s else 2 * q1[r][s]
            if c:
                acc = acc + Poly.monomial((r + s, 0, 0), c)
    total = total + delta_system(config.cos_theta).g[0] * acc
    return total


def residual_constraint_ii(
    config: ProblemConfig, blocks: dict[str, RatMatrix]
) -> Poly:
    """The trivariate identity's defect polynomial."""
    d = config.d
    shape = config.shape
    total = Poly.const(blocks["B"][1][1])
    for k in range(d + 1):
        total = total + _pair_poly(s_matrix(k, shape).entries, blocks[f"F{k}"])
    multipliers = delta_system(config.cos_theta).s
    for j, deg in included_multipliers(d):
        mult = Poly.const(1) if j == 0 else multipliers[j - 1]
        if config.reduced:
            vm = v_matrices(deg)
            for suffix, vmat in (
                ("t", vm.v_trv),
                ("a", vm.v_alt),
                ("s", vm.v_std),
            ):
                if vmat.dim:
                    total = total + mult * _pair_poly(
                        vmat.entries, blocks[f"R{j}{suffix}"]
                    )
        else:
            monos = monomials_upto(deg)
            X = blocks[f"R{j}m"]
            acc = Poly()
            for r, mr in enumerate(monos):
                for s in range(r, len(monos)):
                    c = X[r][s] if r == s else 2 * X[r][s]
                    if c:
                        ms = monos[s]
                        acc = acc + Poly.monomial(
                            (mr[0] + ms[0], mr[1] + ms[1], mr[2] + ms[2]), c
                        )
            total = total + mult * acc
    return total


# ---------------------------------------------------------------------------
# canonical absorption of residuals

def split_monomial(m: Mono) -> tuple[Mono, Mono]:
    """Canonical factor pair: greedy half of the exponents in u, v, t order."""
    total = m[0] + m[1] + m[2]
    h = total - total // 2
    a1 = min(m[0], h)
    b1 = min(m[1], h - a1)
    c1 = min(m[2], h - a1 - b1)
    m1 = (a1, b1, c1)
    m2 = (m[0] - a1, m[1] - b1, m[2] - c1)
    return m1, m2


def absorb_univariate(r: Poly, d: int) -> RatMatrix:
    """Symmetric A over basis {u^0..u^d} with <V, A> = -r, canonical split."""
    A = [[Fraction(0)] * (d + 1) for _ in range(d + 1)]
    for (a, b, c), coef in r.terms.items():
        if b or c:
            raise ValueError("absorb_univariate: residual is not univariate")
        if a > 2 * d:
            raise ValueError(f"residual degree {a} exceeds 2d = {2 * d}")
        i, j = a // 2, a - a // 2
        if i == j:
            A[i][i] -= coef
        else:
            A[i][j] -= coef / 2
            A[j][i] -= coef / 2
    return A


def absorb_monomial(r: Poly, d: int) -> RatMatrix:
    """Symmetric A over the degree-<=d monomial basis with <V, A> = -r."""
    monos = monomials_upto(d)
    index = {m: i for i, m in enumerate(monos)}
    A = [[Fraction(0)] * len(monos) for _ in range(len(monos))]
    for m, coef in r.terms.items():
        if sum(m) > 2 * d:
            raise ValueError(f"residual degree {sum(m)} exceeds 2d = {2 * d}")
        m1, m2 = split_monomial(m)
        i, j = index[m1], index[m2]
        if i == j:
            A[i][i] -= coef
        else:
            A[i][j] -= coef / 2
            A[j][i] -= coef / 2
    return A


def _dot_rows(vec: dict[int, Fraction], X: RatMatrix, other: dict[int, Fraction]) -> Fraction:
    """vec^T X other for sparse coordinate dicts."""
    total = Fraction(0)
    for i, vi in vec.items():
        row = X[i]
        total += vi * sum((row[j] * wj for j, wj in other.items()), Fraction(0))
    return total


def absorb_reduced(
    r: Poly, d: int
) -> tuple[RatMatrix, RatMatrix, RatMatrix]:
    """Corrections (A_t, A_a, A_s) to the three constant-multiplier blocks.

    Route: canonical monomial-basis correction, group-averaged (so it lies in
    the commutant), then projected onto the isotypic blocks using the exact
    orthogonality of the adapted basis.  For the standard component the
    projection through first components and through (scaled) second
    components must agree and the cross terms must vanish — both are
    asserted, which makes this function an online self-check of the basis.
    """
    monos = monomials_upto(d)
    index = {m: i for i, m in enumerate(monos)}
    orbit_coefficients(r, require_invariant=True)  # reject non-invariant input
    A_bar = reynolds_average(absorb_monomial(r, d), monos)

    basis = symmetry_adapted_basis(d)

    def coords(p: Poly) -> dict[int, Fraction]:
        return {index[m]: c for m, c in p.terms.items()}

    def norm_sq(p: Poly) -> Fraction:
        return sum((c * c for c in p.terms.values()), Fraction(0))

    def project(vectors) -> RatMatrix:
        cs = [coords(v) for v in vectors]
        ns = [norm_sq(v) for v in vectors]
        k = len(vectors)
        out = [[Fraction(0)] * k for _ in range(k)]
        for i in range(k):
            for j in range(i, k):
                val = _dot_rows(cs[i], A_bar, cs[j]) / (ns[i] * ns[j])
                out[i][j] = val
                out[j][i] = val
        return out

    A_t = project(basis.trivial)
    A_a = project(basis.alternating)

    x1s = [coords(x1) for x1, _ in basis.standard]
    ws = [coords(w) for _, w in basis.standard]
    norms = [norm_sq(x1) for x1, _ in basis.standard]
    k = len(basis.standard)
    A_s = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            via_first = _dot_rows(x1s[i], A_bar, x1s[j]) / (norms[i] * norms[j])
            via_second = (
                3 * _dot_rows(ws[i], A_bar, ws[j]) / (norms[i] * norms[j])
            )
            if via_first != via_second:
                raise AssertionError(
                    "standard-component projection mismatch: the averaged "
                    "correction is not in the commutant"
                )
            if _dot_rows(x1s[i], A_bar, ws[j]) != 0:
                raise AssertionError(
                    "standard-component cross term nonzero after averaging"
                )
            A_s[i][j] = via_first
            A_s[j][i] = via_first
    return A_t, A_a, A_s


# ---------------------------------------------------------------------------
# orchestration

@dataclass
class ResidualReport:
    lambda_per_block: dict[str, Fraction]
    residual_norm_sq: dict[str, Fraction]
    correction_norm_sq: dict[str, Fraction]
    failed_psd_blocks: list[str]
    failed_norm_blocks: list[str]
    notes: list[str]


@dataclass
class CertifyResult:
    status: str  # "certified" | "pd-failure" | "norm-test-failed"
    config: ProblemConfig
    bound: Fraction | None
    bound_decimal: str | None
    solver_objective: Fraction | None
    report: ResidualReport
    repaired: dict[str, RatMatrix] | None

    def to_report_dict(self) -> dict:
        rep = self.report
        return {
            "n": self.config.n,
            "d": self.config.d,
            "cos_theta": str(self.config.cos_theta),
            "mode": self.config.mode,
            "lambda_min": str(self.config.lambda_min),
            "status": self.status,
            "certified_bound_rational": (
                None if self.bound is None else str(self.bound)
            ),
            "certified_bound_decimal": self.bound_decimal,
            "solver_objective": (
                None
                if self.solver_objective is None
                else format_decimal(self.solver_objective, 20)
            ),
            "lambda_per_block": {
                k: format_decimal(v, 12) if v else "0.0"
                for k, v in rep.lambda_per_block.items()
            },
            "residual_norms": {
                k: format_decimal(v, 12) if v else "0.0"
                for k, v in rep.residual_norm_sq.items()
            },
            "correction_norms": {
                k: format_decimal(v, 12) if v else "0.0"
                for k, v in rep.correction_norm_sq.items()
            },
            "failed_psd_blocks": rep.failed_psd_blocks,
            "failed_norm_blocks": rep.failed_norm_blocks,
            "notes": rep.notes,
        }


def decimal_string(x: Fraction, sig: int = 30) -> str:
    """Plain positional decimal with `sig` significant digits."""
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    y = -x if x < 0 else x
    e10 = len(str(y.numerator)) - len(str(y.denominator))
    while Fraction(10) ** e10 > y:
        e10 -= 1
    while Fraction(10) ** (e10 + 1) <= y:
        e10 += 1
    m = round(y / Fraction(10) ** (e10 - sig + 1))
    if m >= 10**sig:
        m //= 10
        e10 += 1
    ds = str(m)
    if 0 <= e10 < sig:
        ip, fp = ds[: e10 + 1], ds[e10 + 1 :].rstrip("0")
        return sign + ip + ("." + fp if fp else "")
    if -4 < e10 < 0:
        return sign + "0." + "0" * (-e10 - 1) + ds.rstrip("0")
    return format_decimal(x, sig)


def metadata_from_config(config: ProblemConfig) -> ProblemMetadata:
    """Metadata equivalent to what emit() records, without touching disk."""
    shifted = apply_lambda_shift(assemble(config), config.lambda_min)
    return ProblemMetadata(shifted, "(not emitted)")


def _check_lineage(metadata: ProblemMetadata) -> SdpProblem:
    """Re-derive the problem from its config; it must match the sidecar."""
    base = assemble(metadata.problem.config)
    shifted = apply_lambda_shift(base, metadata.problem.config.lambda_min)
    got, want = metadata.problem, shifted
    if [b for b in got.blocks] != [b for b in want.blocks]:
        raise LineageError("sidecar block layout differs from rebuild")
    if len(got.rows) != len(want.rows):
        raise LineageError("sidecar row count differs from rebuild")
    for rg, rw in zip(got.rows, want.rows):
        if rg.label != rw.label or rg.rhs != rw.rhs or rg.entries != rw.entries:
            raise LineageError(f"sidecar row {rg.label} differs from rebuild")
    if (
        got.objective != want.objective
        or got.objective_constant != want.objective_constant
    ):
        raise LineageError("sidecar objective differs from rebuild")
    return base


def _repair(
    config: ProblemConfig,
    base: SdpProblem,
    blocks: dict[str, RatMatrix],
    a_vals: list[Fraction],
    precision_bits: int,
    report: ResidualReport,
) -> dict[str, RatMatrix] | None:
    """Rationalize every PSD block and absorb the exact residuals.

    Returns the repaired blocks, or None with the failure recorded in the
    report (pd-failure when a Cholesky margin cannot be found, norm-test
    failure when a correction overruns its block's margin).
    """
    d = config.d

    # per-block rationalization through the Cholesky margin
    repaired: dict[str, RatMatrix] = {}
    for b in base.blocks:
        if b.kind != "psd":
            continue
        got = cholesky_floor(blocks[b.name], precision_bits)
        if got is None:
            report.failed_psd_blocks.append(b.name)
            report.lambda_per_block[b.name] = Fraction(0)
            continue
        lam, L = got
        report.lambda_per_block[b.name] = lam
        repaired[b.name] = rationalize(lam, L)
    if report.failed_psd_blocks:
        report.notes.append(
            "not positive semidefinite even at margin zero: "
            + ", ".join(report.failed_psd_blocks)
        )
        return None

    # exact residuals of both identities
    r_i = residual_constraint_i(config, repaired, a_vals)
    r_ii = residual_constraint_ii(config, repaired)
    report.residual_norm_sq["i"] = sum(
        (c * c for c in r_i.terms.values()), Fraction(0)
    )
    report.residual_norm_sq["ii"] = sum(
        (c * c for c in r_ii.terms.values()), Fraction(0)
    )

    # canonical absorption, with the per-block margin as the budget
    corrections: dict[str, RatMatrix] = {"Q0": absorb_univariate(r_i, d)}
    if config.reduced:
        A_t, A_a, A_s = absorb_reduced(r_ii, d)
        for suffix, A in (("t", A_t), ("a", A_a), ("s", A_s)):
            if A:
                corrections[f"R0{suffix}"] = A
    else:
        corrections["R0m"] = absorb_monomial(r_ii, d)

    for name, A in corrections.items():
        nsq = frobenius_norm_sq(A)
        report.correction_norm_sq[name] = nsq
        lam = report.lambda_per_block[name]
        if nsq > lam * lam:
            report.failed_norm_blocks.append(name)
        repaired[name] = mat_add(repaired[name], A)

    if report.failed_norm_blocks:
        report.notes.append(
            "correction larger than the Cholesky margin on: "
            + ", ".join(
                f"{name} (|A|_F^2 = {format_decimal(report.correction_norm_sq[name], 6)}"
                f" vs lambda^2 = {format_decimal(report.lambda_per_block[name] ** 2, 6) if report.lambda_per_block[name] else '0.0'})"
                for name in report.failed_norm_blocks
            )
        )
        return None

    # the identities must now hold *identically*
    check_i = residual_constraint_i(config, repaired, a_vals)
    check_ii = residual_constraint_ii(config, repaired)
    if check_i or check_ii:
        raise AssertionError(
            "post-absorption residual is not the zero polynomial "
            f"(|i| = {len(check_i.terms)} terms, |ii| = {len(check_ii.terms)} terms)"
        )
    return repaired


def certify(
    solution: Solution,
    metadata: ProblemMetadata,
    precision_bits: int = 212,
) -> CertifyResult:
    """Turn a floating solution into an exact rational certificate.

    Never silent: the result's status is "certified" only after both
    identities have been re-verified to hold exactly over Q with every block
    exactly PSD; otherwise it is "pd-failure" or "norm-test-failed" with the
    measured numbers in the report.
    """
    base = _check_lineage(metadata)
    config = base.config
    lam_shift = config.lambda_min
    d = config.d

    report = ResidualReport({}, {}, {}, [], [], [])
    solver_obj = solved_objective(solution, metadata.problem)

    # 1. unshift and clip
    blocks: dict[str, RatMatrix] = {}
    for b in base.blocks:
        if b.name not in solution.blocks:
            raise BlockShapeError(f"solution is missing block {b.name}")
        X = [row[:] for row in solution.blocks[b.name]]
        mat_eq_dim(X, b.dim, b.name)
        if b.kind == "psd" and lam_shift:
            X = mat_add(X, identity_times(b.dim, lam_shift))
        blocks[b.name] = X
    a_vals = [max(blocks["a"][i][i], Fraction(0)) for i in range(d)]

    # 2. monomial mode: average the multiplier blocks into the commutant so
    # the (orbit-sum) rows pin down the symmetrized identity exactly
    if not config.reduced:
        for j, deg in included_multipliers(d):
            name = f"R{j}m"
            blocks[name] = reynolds_average(blocks[name], monomials_upto(deg))

    # 3. an input whose residuals already vanish identically (a synthetic
    # certificate, or the repaired blocks of an earlier run) is settled in
    # exact arithmetic alone; pushing it through a floating Cholesky would
    # perturb it for no reason
    if not residual_constraint_i(
        config, blocks, a_vals
    ) and not residual_constraint_ii(config, blocks):
        bad = [
            b.name
            for b in base.blocks
            if b.kind == "psd" and not exact_psd(blocks[b.name])
        ]
        if bad:
            report.failed_psd_blocks.extend(bad)
            for name in bad:
                report.lambda_per_block[name] = Fraction(0)
            report.notes.append(
                "exact factorization found a negative pivot in: "
                + ", ".join(bad)
            )
            return CertifyResult(
                "pd-failure", config, None, None, solver_obj, report, None
            )
        repaired = {
            b.name: [row[:] for row in blocks[b.name]]
            for b in base.blocks
            if b.kind == "psd"
        }
        report.residual_norm_sq["i"] = Fraction(0)
        report.residual_norm_sq["ii"] = Fraction(0)
        report.notes.append(
            "input already exactly feasible; positive semidefiniteness "
            "verified by exact factorization, no repair applied"
        )
    else:
        repaired = _repair(config, base, blocks, a_vals, precision_bits, report)
        if repaired is None:
            status = (
                "pd-failure" if report.failed_psd_blocks else "norm-test-failed"
            )
            return CertifyResult(
                status, config, None, None, solver_obj, report, None
            )

    repaired["a"] = [
        [a_vals[i] if i == j else Fraction(0) for j in range(d)]
        for i in range(d)
    ]

    # 4. the certified value
    f0 = repaired["F0"]
    all_ones = sum(
        (v for row in f0 for v in row), Fraction(0)
    )
    bound = 1 + sum(a_vals, Fraction(0)) + repaired["B"][0][0] + all_ones

    if solver_obj is not None:
        slack = 10 * lam_shift * (d + 2) + Fraction(1, 2 ** (precision_bits // 2))
        if bound < solver_obj - slack:
            raise AssertionError(
                f"certified bound {decimal_string(bound, 12)} fell more than "
                f"{format_decimal(slack, 6)} below the solver objective "
                f"{format_decimal(solver_obj, 12)}"
            )
        report.notes.append(
            "bound - solver objective = "
            + format_decimal(bound - solver_obj, 6)
        )

    return CertifyResult(
        "certified",
        config,
        bound,
        decimal_string(bound, 30),
        solver_obj,
        report,
        repaired,
    )


def repaired_as_solution(result: CertifyResult) -> Solution:
    """Repackage a certificate's exact blocks as an (unshifted) Solution."""
    if result.repaired is None:
        raise ValueError("no repaired solution on a failed certification")
    return Solution(
        blocks={k: [row[:] for row in v] for k, v in result.repaired.items()},
        objective_primal=None,
        objective_dual=None,
        phase="repaired",
    )


def write_report(result: CertifyResult, path) -> Path:
    import json

    path = Path(path)
    path.write_text(json.dumps(result.to_report_dict(), indent=1) + "\n")
    return path
