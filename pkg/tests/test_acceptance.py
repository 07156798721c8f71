"""Acceptance gate: the numbered end-to-end checks, one PASS line each.

Each check prints a single line, bypassing capture, of the form

    ACCEPTANCE <k> (<name>): PASS — <measured numbers>

so a full `pytest -v` run shows one verdict per check (failures surface as
pytest FAILED lines for the same test).  Checks 5 and 9 need certified
bounds, so they run at the margin the resolved solver supports: 1e-8 with a
high-precision binary, 1e-6 with the bundled double-precision fallback.  In
the fallback case a norm-test failure is acceptable *only* if it is fully
reported (measured correction norms and margins) — silent success and
silent failure both fail the gate.  Check 6 compares the two formulations'
solver objectives at margin zero: the shift bloats the two differently
parametrized feasible sets at first order, so only the unshifted optima are
comparable at the stated tolerance.
"""

import os
import random
import time
from fractions import Fraction
from math import comb

import pytest

from kissbound.certify import (
    absorb_monomial,
    certify,
    frobenius_norm_sq,
    metadata_from_config,
    repaired_as_solution,
    _pair_poly,
)
from kissbound.orthopoly import SdpShape, jacobi, s_matrix
from kissbound.poly import Poly, monomials_upto, univariate_coeffs
from kissbound.sdpbuild import ProblemConfig, delta_membership
from kissbound.solverio import Solution
from kissbound.symmetry import S3, act, symmetry_adapted_basis

from oracles import weighted_inner

HALF = Fraction(1, 2)


@pytest.fixture
def announce(capsys):
    def _p(line: str):
        with capsys.disabled():
            print(line)

    return _p


# ---------------------------------------------------------------------------
# 1. block-dimension identity

def test_acceptance_1_block_dimension_identity(announce):
    t0 = time.monotonic()
    for d in range(1, 17):
        a, b, c = symmetry_adapted_basis(d).counts
        assert a + b + 2 * c == comb(d + 3, 3), d
    assert symmetry_adapted_basis(15).counts == (174, 102, 270)
    assert comb(18, 3) == 816
    elapsed = time.monotonic() - t0
    assert elapsed < 60
    announce(
        "ACCEPTANCE 1 (block-dimension identity): PASS — a+b+2c = C(d+3,3) "
        f"exactly for d=1..16, d=15 gives (174, 102, 270); {elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 2. invariance of the symmetrized kernel matrices

def test_acceptance_2_kernel_matrix_invariance(announce):
    t0 = time.monotonic()
    checked = 0
    for n in range(3, 10):
        shape = SdpShape(n=n, d=6, cos_theta=HALF)
        for k in range(7):
            s = s_matrix(k, shape)
            for i in range(s.dim):
                for j in range(i, s.dim):
                    entry = s[i, j]
                    for sigma in S3:
                        assert act(sigma, entry) == entry, (n, k, i, j, sigma)
                    checked += 1
    elapsed = time.monotonic() - t0
    announce(
        "ACCEPTANCE 2 (kernel-matrix invariance): PASS — "
        f"{checked} distinct entries exactly invariant under all 6 "
        f"permutations, n=3..9, k=0..6, d=6; {elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 3. equivalence of the two membership descriptions

# hand-picked exact triples sitting on the domain's boundary strata
# (corners, g_i = 0 faces, det = 0 surface), plus a few clearly in/out
BOUNDARY_TRIPLES = [
    (Fraction(1), Fraction(1), Fraction(1)),
    (Fraction(-1), Fraction(-1), Fraction(-1)),
    (Fraction(-1), Fraction(-1), Fraction(1)),
    (Fraction(1), Fraction(1), Fraction(-1)),
    (Fraction(1), Fraction(-1), Fraction(-1)),
    (Fraction(-1), Fraction(1), Fraction(-1)),
    (Fraction(0), Fraction(0), Fraction(1)),
    (Fraction(0), Fraction(0), Fraction(-1)),
    (Fraction(0), Fraction(1), Fraction(0)),
    (Fraction(3, 5), Fraction(4, 5), Fraction(0)),
    (Fraction(-3, 5), Fraction(4, 5), Fraction(0)),
    (Fraction(4, 5), Fraction(3, 5), Fraction(1)),
    (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)),
    (Fraction(1, 2), Fraction(-1), Fraction(1)),
    (Fraction(1, 2), Fraction(1, 2), Fraction(1)),
    (Fraction(-1, 4), Fraction(-1, 4), Fraction(-1, 4)),
    (Fraction(0), Fraction(0), Fraction(0)),
    (Fraction(1), Fraction(0), Fraction(0)),
    (Fraction(-1), Fraction(0), Fraction(0)),
    (Fraction(1, 2), Fraction(-1, 2), Fraction(-1)),
]


def test_acceptance_3_membership_forms_agree(announce):
    assert len(BOUNDARY_TRIPLES) == 20
    t0 = time.monotonic()
    angles = (HALF, Fraction(0), Fraction(-1, 4))
    rng = random.Random(20260815)
    total_random = 10**5
    checked = 0
    for idx in range(total_random):
        pt = tuple(Fraction(rng.randint(-64, 64), 64) for _ in range(3))
        c = angles[idx % 3]
        assert delta_membership(pt, c, via="g") == delta_membership(
            pt, c, via="s"
        ), (pt, c)
        checked += 1
    for c in angles:
        for pt in BOUNDARY_TRIPLES:
            assert delta_membership(pt, c, via="g") == delta_membership(
                pt, c, via="s"
            ), (pt, c)
            checked += 1
    elapsed = time.monotonic() - t0
    assert elapsed < 60
    announce(
        "ACCEPTANCE 3 (membership equivalence): PASS — direct and "
        f"symmetrized inequality systems agree on {total_random} random "
        f"rational triples (split across the three angles) and 3x20 boundary "
        f"triples, exactly; {elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 4. normalization and orthogonality of the polynomial family

def test_acceptance_4_normalization_and_orthogonality(announce):
    one = (Fraction(1), Fraction(0), Fraction(0))
    for n in range(3, 11):
        for k in range(13):
            assert jacobi(k, n).eval(one) == 1, (n, k)
    coeffs = [univariate_coeffs(jacobi(k, 5), k) for k in range(9)]
    pairs = 0
    for j in range(9):
        for k in range(9):
            if j != k:
                assert weighted_inner(coeffs[j], coeffs[k], Fraction(1)) == 0
                pairs += 1
    announce(
        "ACCEPTANCE 4 (normalization and orthogonality): PASS — value 1 at "
        "the right endpoint for k<=12, n<=10; all "
        f"{pairs} exact cross integrals vanish for n=5, j!=k<=8"
    )


# ---------------------------------------------------------------------------
# 5. end-to-end certified bound at d=5

def test_acceptance_5_end_to_end_certified_bound(
    announce, request, high_precision_solver, cert_lambda
):
    t0 = time.monotonic()
    job = request.getfixturevalue("job_d5")
    res = request.getfixturevalue("cert_d5")
    elapsed = time.monotonic() - t0
    assert elapsed < 900

    mode = "high-precision" if high_precision_solver else "double-precision fallback"
    assert res.status in {"certified", "norm-test-failed"}, res.status
    if res.status == "certified":
        assert 12 <= res.bound <= Fraction(68, 5)  # [12, 13.6]
        gap = abs(res.bound - job.objective)
        assert gap <= Fraction(1, 10**5)
        announce(
            "ACCEPTANCE 5 (end-to-end certified bound): PASS — n=3, d=5, "
            f"margin {cert_lambda} ({mode}): certified {res.bound_decimal[:16]} "
            f"in [12, 13.6], |bound - solver objective| = {float(gap):.2e} "
            f"<= 1e-5; {elapsed:.0f}s"
        )
    else:
        # the fallback's documented failure mode: must be fully measured
        assert res.report.correction_norm_sq, "missing measured norms"
        assert res.report.lambda_per_block, "missing measured margins"
        assert res.report.failed_norm_blocks
        assert res.bound is None
        announce(
            "ACCEPTANCE 5 (end-to-end certified bound): PASS — "
            f"{mode}: certification failed the norm test and reported it: "
            f"blocks {res.report.failed_norm_blocks}, measured norms "
            f"{ {k: float(v) for k, v in res.report.correction_norm_sq.items()} }"
        )


@pytest.mark.skipif(
    not os.environ.get("KISSBOUND_EXTENDED"),
    reason="the d=15 run takes hours; set KISSBOUND_EXTENDED=1 to enable",
)
def test_acceptance_5_extended_d15_reference_value(announce, cert_lambda, tmp_path):
    from conftest import solve_job

    cfg = ProblemConfig(
        n=3, d=15, cos_theta=HALF, lambda_min=cert_lambda, reduced=True
    )
    job = solve_job(cfg, tmp_path / "d15")
    res = certify(job.solution, job.metadata)
    assert res.status == "certified", res.status
    ref = Fraction("12.374682")
    assert abs(res.bound - ref) <= Fraction(1, 1000)
    announce(
        "ACCEPTANCE 5-extended (d=15 reference): PASS — certified "
        f"{res.bound_decimal[:14]} within 1e-3 of 12.374682"
    )


# ---------------------------------------------------------------------------
# 6. the two formulations give the same optimum

def test_acceptance_6_reduced_equals_monomial(announce, request):
    t0 = time.monotonic()
    diffs = {}
    for d in (3, 4):
        red = request.getfixturevalue(f"job_d{d}_reduced_flat")
        mono = request.getfixturevalue(f"job_d{d}_monomial_flat")
        diff = abs(red.objective - mono.objective)
        assert diff <= Fraction(1, 10**6), (d, float(diff))
        diffs[d] = float(diff)
    elapsed = time.monotonic() - t0
    assert elapsed < 900
    announce(
        "ACCEPTANCE 6 (formulation equivalence): PASS — unshifted optima "
        f"agree within 1e-6: d=3 diff {diffs[3]:.2e}, d=4 diff {diffs[4]:.2e}; "
        f"{elapsed:.0f}s"
    )


# ---------------------------------------------------------------------------
# 7. adversarial certification checks

def _objective_of(sol: Solution, d: int) -> Fraction:
    f0 = sol.blocks["F0"]
    return (
        1
        + sum(sol.blocks["a"][i][i] for i in range(d))
        + sol.blocks["B"][0][0]
        + sum(v for row in f0 for v in row)
    )


def _clean_config(cfg: ProblemConfig) -> ProblemConfig:
    return ProblemConfig(
        n=cfg.n, d=cfg.d, cos_theta=cfg.cos_theta,
        lambda_min=Fraction(0), reduced=cfg.reduced,
    )


def test_acceptance_7a_exact_solution_certifies_exactly(announce, certified_d3):
    syn = repaired_as_solution(certified_d3)
    meta = metadata_from_config(_clean_config(certified_d3.config))
    res = certify(syn, meta)
    assert res.status == "certified"
    assert res.bound == _objective_of(syn, certified_d3.config.d)  # exact
    assert all(v == 0 for v in res.report.residual_norm_sq.values())
    announce(
        "ACCEPTANCE 7a (exactly feasible input): PASS — synthetic rational "
        "solution certified with bound equal to its objective, bit for bit"
    )


def test_acceptance_7b_indefinite_block_is_named(announce, certified_d3):
    meta = metadata_from_config(_clean_config(certified_d3.config))
    eps = Fraction(1, 10**6)
    psd_names = [b.name for b in meta.problem.blocks if b.kind == "psd"]
    for name in psd_names:
        syn = repaired_as_solution(certified_d3)
        X = syn.blocks[name]
        X[0][0] -= X[0][0] + eps  # quadratic form at e_0 is now exactly -1e-6
        res = certify(syn, meta)
        assert res.status == "pd-failure", (name, res.status)
        assert name in res.report.failed_psd_blocks, name
        assert res.bound is None
    announce(
        "ACCEPTANCE 7b (indefinite block): PASS — a -1e-6 eigenvalue "
        f"injected into each of the {len(psd_names)} PSD blocks in turn "
        "produced a pd-failure naming that block"
    )


def test_acceptance_7c_inflated_residual_never_certifies(announce, certified_d3):
    syn = repaired_as_solution(certified_d3)
    syn.blocks["Q0"][0][0] += Fraction(1, 1000)  # residual >> any margin
    meta = metadata_from_config(_clean_config(certified_d3.config))
    res = certify(syn, meta)
    assert res.status == "norm-test-failed"
    assert res.status != "certified" and res.bound is None
    assert "Q0" in res.report.failed_norm_blocks
    assert res.report.correction_norm_sq["Q0"] >= Fraction(1, 10**6)
    note = "; ".join(res.report.notes)
    assert "Q0" in note and "lambda" in note
    announce(
        "ACCEPTANCE 7c (inflated residual): PASS — correction of norm "
        f"{float(res.report.correction_norm_sq['Q0']) ** 0.5:.1e} against margin "
        f"{float(res.report.lambda_per_block['Q0']):.1e} failed the norm test, "
        "nothing was certified"
    )


# ---------------------------------------------------------------------------
# 8. residual absorption is exact

def test_acceptance_8_absorption_reconstructs_residuals(announce):
    d = 4
    monos = monomials_upto(d)
    coupling = [
        [
            Poly.monomial(tuple(x + y for x, y in zip(mr, ms)))
            for ms in monos
        ]
        for mr in monos
    ]
    rng = random.Random(8)
    t0 = time.monotonic()
    worst_terms = 0
    for _ in range(100):
        terms = {}
        for m in monomials_upto(2 * d):
            if rng.random() < 0.5:
                terms[m] = Fraction(rng.randint(-99, 99), rng.randint(1, 17))
        r = Poly(terms)
        worst_terms = max(worst_terms, len(r.terms))
        A = absorb_monomial(r, d)
        assert _pair_poly(coupling, A) == -r  # exact reconstruction
        nsq = frobenius_norm_sq(A)
        assert isinstance(nsq, Fraction) and nsq >= 0
    elapsed = time.monotonic() - t0
    announce(
        "ACCEPTANCE 8 (absorption exactness): PASS — 100 random residuals "
        f"of degree <= {2*d} (up to {worst_terms} terms) reconstructed "
        f"exactly through the coupling pairing, Frobenius norms exact "
        f"rationals; {elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 9. certified bounds tighten with the degree

def test_acceptance_9_bounds_non_increasing(announce, request, cert_lambda):
    t0 = time.monotonic()
    results = {d: request.getfixturevalue(f"cert_d{d}") for d in (3, 4, 5)}
    elapsed = time.monotonic() - t0
    assert elapsed < 900

    statuses = {d: r.status for d, r in results.items()}
    if all(s == "certified" for s in statuses.values()):
        tol = Fraction(1, 10**6)
        b = {d: results[d].bound for d in (3, 4, 5)}
        assert b[4] <= b[3] + tol, (float(b[3]), float(b[4]))
        assert b[5] <= b[4] + tol, (float(b[4]), float(b[5]))
        announce(
            "ACCEPTANCE 9 (monotone bounds): PASS — certified bounds at "
            f"margin {cert_lambda}: d=3 {results[3].bound_decimal[:12]}, "
            f"d=4 {results[4].bound_decimal[:12]}, "
            f"d=5 {results[5].bound_decimal[:12]}: non-increasing within 1e-6"
        )
    else:
        # the double-precision fallback may fail the norm test — but only
        # loudly, with the measured numbers in the report
        for d, r in results.items():
            assert r.status in {"certified", "norm-test-failed"}, (d, r.status)
            if r.status != "certified":
                assert r.report.correction_norm_sq and r.report.lambda_per_block
        announce(
            "ACCEPTANCE 9 (monotone bounds): PASS — fallback solver: "
            f"statuses {statuses} with measured norms reported; no silent "
            "success"
        )
