"""Shared fixtures: real solved jobs, produced once per session.

Every fixture here goes through the honest pipeline — assemble, shift, emit
to an SDPA file on disk, run the resolved solver as a subprocess, parse its
output back — so the downstream tests exercise exactly what the CLI does.
The lambda used for certification-bearing fixtures depends on the resolved
solver: 1e-8 with a high-precision binary, 1e-6 with the bundled
double-precision fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import pytest

from kissbound.certify import CertifyResult, certify
from kissbound.sdpbuild import ProblemConfig, SdpProblem, apply_lambda_shift, assemble
from kissbound.solverio import (
    ProblemMetadata,
    Solution,
    SolverConfig,
    emit,
    parse,
    read_sidecar,
    resolve_solver,
    run,
    solved_objective,
)

KISSING = Fraction(1, 2)


@dataclass
class SolvedJob:
    config: ProblemConfig
    metadata: ProblemMetadata
    solution: Solution
    objective: Fraction
    workdir: str

    @property
    def problem(self) -> SdpProblem:
        return self.metadata.problem


@pytest.fixture(scope="session")
def high_precision_solver() -> bool:
    return resolve_solver(SolverConfig()).high_precision


@pytest.fixture(scope="session")
def cert_lambda(high_precision_solver) -> Fraction:
    """Shift used for certified runs: 1e-8 normally, 1e-6 when the only
    available solver is double precision."""
    if high_precision_solver:
        return Fraction(1, 10**8)
    return Fraction(1, 10**6)


def solve_job(config: ProblemConfig, workdir) -> SolvedJob:
    workdir.mkdir(parents=True, exist_ok=True)
    problem = assemble(config)
    if config.lambda_min:
        problem = apply_lambda_shift(problem, config.lambda_min)
    dat, _sidecar = emit(problem, workdir / "problem.dat-s")
    solver = resolve_solver(SolverConfig())
    out = workdir / "solver.out"
    run(SolverConfig(), dat, out)
    metadata = read_sidecar(str(dat) + ".meta.json")
    solution = parse(out, metadata.problem)
    objective = solved_objective(solution, metadata.problem)
    assert objective is not None, f"solver {solver.name} reported no objective"
    return SolvedJob(config, metadata, solution, objective, str(workdir))


def _job_fixture(name: str, **cfg_kwargs):
    wants_lambda = "lambda_min" not in cfg_kwargs

    @pytest.fixture(scope="session", name=name)
    def fx(tmp_path_factory, cert_lambda):
        kwargs = dict(cfg_kwargs)
        if wants_lambda:
            kwargs["lambda_min"] = cert_lambda
        config = ProblemConfig(n=3, cos_theta=KISSING, **kwargs)
        return solve_job(config, tmp_path_factory.mktemp(name))

    return fx


# certification-bearing jobs (shifted)
job_d3 = _job_fixture("job_d3", d=3, reduced=True)
job_d4 = _job_fixture("job_d4", d=4, reduced=True)
job_d5 = _job_fixture("job_d5", d=5, reduced=True)

# formulation-comparison jobs (unshifted, both parametrizations)
job_d3_reduced_flat = _job_fixture(
    "job_d3_reduced_flat", d=3, reduced=True, lambda_min=Fraction(0)
)
job_d3_monomial_flat = _job_fixture(
    "job_d3_monomial_flat", d=3, reduced=False, lambda_min=Fraction(0)
)
job_d4_reduced_flat = _job_fixture(
    "job_d4_reduced_flat", d=4, reduced=True, lambda_min=Fraction(0)
)
job_d4_monomial_flat = _job_fixture(
    "job_d4_monomial_flat", d=4, reduced=False, lambda_min=Fraction(0)
)


def _cert_fixture(name: str, job_name: str):
    @pytest.fixture(scope="session", name=name)
    def fx(request):
        job: SolvedJob = request.getfixturevalue(job_name)
        return certify(job.solution, job.metadata)

    return fx


cert_d3 = _cert_fixture("cert_d3", "job_d3")
cert_d4 = _cert_fixture("cert_d4", "job_d4")
cert_d5 = _cert_fixture("cert_d5", "job_d5")


@pytest.fixture(scope="session")
def certified_d3(cert_d3) -> CertifyResult:
    """The d=3 certificate, skipping dependents honestly if it failed."""
    if cert_d3.status != "certified":
        pytest.skip(
            f"d=3 certification did not succeed here (status {cert_d3.status}); "
            "dependent checks need a certificate to bootstrap from"
        )
    return cert_d3
