"""Assembly of the two-constraint SDP whose optimum upper-bounds the code size.

Variables (all exact-rational data; the solver sees one big block-diagonal
PSD variable):

* a_1..a_d        nonnegative scalars (a diagonal block),
* B               2x2 PSD (entries b_11, b_12, b_22),
* F_0..F_d        PSD, F_k of size d-k+1,
* one PSD multiplier block per sum-of-squares certificate slot.

Constraint (i) forces a univariate identity on the edge v = u, t = 1 of the
domain (coefficients of u^0..u^{2d}); constraint (ii) forces a trivariate
identity on the full domain (one row per monomial orbit of degree <= 2d).
The domain itself is cut out by four quadratic/cubic inequalities g_1..g_4;
their elementary symmetric combinations s_1..s_4 are the S3-invariant
multipliers used in reduced mode.

Rows and the objective are stored as sparse functionals over upper-triangle
block coordinates: a stored value c at (block, r, s) contributes c*X_rr when
r == s and 2c*X_rs when r < s (the symmetric-pairing convention of the
sparse solver input format).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from .orthopoly import SdpShape, jacobi, s_matrix
from .poly import Mono, Poly, U, monomials_upto, univariate_coeffs
from .symmetry import orbit_coefficients, orbit_reps_upto, v_matrices

Entry = tuple[str, int, int]  # (block name, row, col), row <= col


@dataclass(frozen=True)
class ProblemConfig:
    """Everything that determines one SDP instance."""

    n: int
    d: int
    cos_theta: Fraction
    lambda_min: Fraction = Fraction(0)
    reduced: bool = True

    def __post_init__(self):
        SdpShape(self.n, self.d, self.cos_theta)  # reuse its validation
        if not isinstance(self.lambda_min, Rational):
            raise TypeError("lambda_min must be exact (int or Fraction)")
        if self.lambda_min < 0:
            raise ValueError("lambda_min must be nonnegative")

    @property
    def shape(self) -> SdpShape:
        return SdpShape(self.n, self.d, self.cos_theta)

    @property
    def mode(self) -> str:
        return "reduced" if self.reduced else "monomial"


@dataclass(frozen=True)
class Block:
    name: str
    dim: int
    kind: str  # "psd" | "diag"

    def __post_init__(self):
        if self.kind not in ("psd", "diag"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError(f"block {self.name}: dim must be positive")


@dataclass
class Row:
    """One linear equality: <functional, X> = rhs."""

    label: str
    entries: dict[Entry, Fraction]
    rhs: Fraction


@dataclass
class SdpProblem:
    config: ProblemConfig
    blocks: tuple[Block, ...]
    rows: list[Row]
    objective: dict[Entry, Fraction]
    objective_constant: Fraction

    def block_by_name(self) -> dict[str, Block]:
        return {b.name: b for b in self.blocks}


# ---------------------------------------------------------------------------
# the domain inequalities

@dataclass(frozen=True)
class DeltaSystem:
    """The four domain inequalities and their symmetric counterparts.

    g[0..2] is the same angle condition in u, v, t; g[3] is the Gram
    determinant condition.  s[0..2] are the elementary symmetric functions
    of g[0..2] and s[3] = g[3]; for real values, g all nonnegative is
    equivalent to s all nonnegative.
    """

    cos_theta: Fraction
    g: tuple[Poly, Poly, Poly, Poly]
    s: tuple[Poly, Poly, Poly, Poly]


@lru_cache(maxsize=None)
def delta_system(cos_theta: Fraction) -> DeltaSystem:
    cos_theta = Fraction(cos_theta)
    gu = (U + 1) * (cos_theta - U)
    gv = gu.map_monomials(lambda m: (0, m[0], 0))
    gt = gu.map_monomials(lambda m: (0, 0, m[0]))
    g4 = Poly(
        {
            (0, 0, 0): 1,
            (1, 1, 1): 2,
            (2, 0, 0): -1,
            (0, 2, 0): -1,
            (0, 0, 2): -1,
        }
    )
    s1 = gu + gv + gt
    s2 = gu * gv + gu * gt + gv * gt
    s3 = gu * gv * gt
    return DeltaSystem(cos_theta, (gu, gv, gt, g4), (s1, s2, s3, g4))


def delta_membership(point, cos_theta, via: str = "g") -> bool:
    """Whether (u, v, t) lies in the constraint domain, exactly.

    via="g" checks the four direct inequalities, via="s" the symmetrized
    ones; the two always agree (elementary symmetric functions of three
    reals are all nonnegative iff the reals are).
    """
    sys = delta_system(cos_theta)
    if via not in ("g", "s"):
        raise ValueError(f"via must be 'g' or 's', not {via!r}")
    polys = sys.g if via == "g" else sys.s
    pt = tuple(Fraction(x) for x in point)
    return all(p.eval(pt) >= 0 for p in polys)


def included_multipliers(d: int) -> list[tuple[int, int]]:
    """(slot index j, SOS basis degree) for the multiplier slots active at d.

    Slot 0 is the constant multiplier 1, slots 1..3 the elementary symmetric
    functions of g (degrees 2, 4, 6), slot 4 the Gram condition (degree 3).
    A slot is dropped when its paired SOS basis degree would be negative.
    """
    degs = [d, d - 1, d - 2, d - 3, d - 2]
    return [(j, deg) for j, deg in enumerate(degs) if deg >= 0]


# ---------------------------------------------------------------------------
# constraint (i): the u-axis identity

def _scatter_univariate(rows, entry: Entry, poly: Poly, scale=1):
    for (a, b, c), coef in poly.terms.items():
        if b or c:
            raise AssertionError(f"entry {entry}: polynomial not univariate")
        prev = rows[a].entries.get(entry, Fraction(0))
        rows[a].entries[entry] = prev + scale * coef


def build_constraint_i(config: ProblemConfig) -> tuple[list[Block], list[Row]]:
    n, d = config.n, config.d
    shape = config.shape
    blocks = [Block("Q0", d + 1, "psd"), Block("Q1", d, "psd")]
    rows = [
        Row(f"i:u{j}", {}, Fraction(-1) if j == 0 else Fraction(0))
        for j in range(2 * d + 1)
    ]

    for k in range(1, d + 1):
        _scatter_univariate(rows, ("a", k - 1, k - 1), jacobi(k, n))

    rows[0].entries[("B", 0, 1)] = Fraction(1)  # pairing doubles this: 2*b_12
    rows[0].entries[("B", 1, 1)] = Fraction(1)

    for k in range(d + 1):
        s_uu1 = [
            [
                p.map_monomials(lambda m: (m[0] + m[1], 0, 0))
                for p in row
            ]
            for row in s_matrix(k, shape).entries
        ]
        dim = len(s_uu1)
        for r in range(dim):
            for s in range(r, dim):
                if s_uu1[r][s]:
                    _scatter_univariate(rows, (f"F{k}", r, s), s_uu1[r][s], 3)

    for r in range(d + 1):
        for s in range(r, d + 1):
            rows[r + s].entries[("Q0", r, s)] = Fraction(1)

    g_coeffs = univariate_coeffs(delta_system(config.cos_theta).g[0], 2)
    for r in range(d):
        for s in range(r, d):
            for e, ge in enumerate(g_coeffs):
                if ge:
                    prev = rows[r + s + e].entries.get(("Q1", r, s), Fraction(0))
                    rows[r + s + e].entries[("Q1", r, s)] = prev + ge

    return blocks, rows


# ---------------------------------------------------------------------------
# constraint (ii): the trivariate identity

def _mono_label(m: Mono) -> str:
    return f"u{m[0]}v{m[1]}t{m[2]}"


def build_constraint_ii(config: ProblemConfig) -> tuple[list[Block], list[Row]]:
    n, d = config.n, config.d
    shape = config.shape
    reps = orbit_reps_upto(2 * d)
    row_of = {rep: Row(f"ii:{_mono_label(rep)}", {}, Fraction(0)) for rep in reps}
    invariant_entries = config.reduced

    def scatter(entry: Entry, poly: Poly):
        for rep, coef in orbit_coefficients(
            poly, require_invariant=invariant_entries
        ).items():
            if coef:
                prev = row_of[rep].entries.get(entry, Fraction(0))
                row_of[rep].entries[entry] = prev + coef

    row_of[(0, 0, 0)].entries[("B", 1, 1)] = Fraction(1)

    for k in range(d + 1):
        sk = s_matrix(k, shape)
        for r in range(sk.dim):
            for s in range(r, sk.dim):
                if sk.entries[r][s]:
                    scatter((f"F{k}", r, s), sk.entries[r][s])

    multipliers = delta_system(config.cos_theta).s
    blocks: list[Block] = []
    for j, deg in included_multipliers(d):
        mult = Poly.const(1) if j == 0 else multipliers[j - 1]
        if config.reduced:
            vm = v_matrices(deg)
            for suffix, vmat in (
                ("t", vm.v_trv),
                ("a", vm.v_alt),
                ("s", vm.v_std),
            ):
                if vmat.dim == 0:
                    continue
                name = f"R{j}{suffix}"
                blocks.append(Block(name, vmat.dim, "psd"))
                for r in range(vmat.dim):
                    for s in range(r, vmat.dim):
                        scatter((name, r, s), mult * vmat.entries[r][s])
        else:
            monos = monomials_upto(deg)
            name = f"R{j}m"
            blocks.append(Block(name, len(monos), "psd"))
            for r, mr in enumerate(monos):
                base = mult * Poly.monomial(mr)
                for s in range(r, len(monos)):
                    scatter((name, r, s), base * Poly.monomial(monos[s]))

    return blocks, [row_of[rep] for rep in reps]


# ---------------------------------------------------------------------------
# whole problem

def assemble(config: ProblemConfig) -> SdpProblem:
    """The full unshifted SDP for one configuration.

    Minimize  1 + sum_k a_k + b_11 + <all-ones, F_0>  subject to the two
    identity constraints and psd-ness of every block.  Apply
    `apply_lambda_shift` before emission if an interior margin is wanted.
    """
    d = config.d
    blocks = [Block(f"F{k}", d - k + 1, "psd") for k in range(d + 1)]
    blocks.append(Block("B", 2, "psd"))
    blocks.append(Block("a", d, "diag"))
    blocks_i, rows_i = build_constraint_i(config)
    blocks_ii, rows_ii = build_constraint_ii(config)

    objective: dict[Entry, Fraction] = {}
    for k in range(d):
        objective[("a", k, k)] = Fraction(1)
    objective[("B", 0, 0)] = Fraction(1)
    for r in range(d + 1):
        for s in range(r, d + 1):
            objective[("F0", r, s)] = Fraction(1)

    return SdpProblem(
        config=config,
        blocks=tuple(blocks + blocks_i + blocks_ii),
        rows=rows_i + rows_ii,
        objective=objective,
        objective_constant=Fraction(1),
    )


def apply_lambda_shift(problem: SdpProblem, lam: Fraction) -> SdpProblem:
    """Substitute X = X' + lam*I in every PSD block.

    The shifted problem asks the solver for X' = X - lam*I >= 0, so any
    solution it returns keeps every PSD block at least lam inside the cone —
    the margin the certifier spends on rounding.  Scalar a_k are left alone
    (certification clips them at zero instead).  Row right-hand sides lose
    lam times the functional's PSD trace; the objective gains the analogous
    constant.
    """
    lam = Fraction(lam)
    kind = {b.name: b.kind for b in problem.blocks}

    def trace_of(entries: dict[Entry, Fraction]) -> Fraction:
        return sum(
            (
                val
                for (bname, r, s), val in entries.items()
                if r == s and kind[bname] == "psd"
            ),
            Fraction(0),
        )

    rows = [
        Row(row.label, row.entries, row.rhs - lam * trace_of(row.entries))
        for row in problem.rows
    ]
    return SdpProblem(
        config=problem.config,
        blocks=problem.blocks,
        rows=rows,
        objective=problem.objective,
        objective_constant=problem.objective_constant
        + lam * trace_of(problem.objective),
    )
