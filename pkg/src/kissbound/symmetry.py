"""S3 machinery: variable-permutation action, invariant bases, and the
symmetry-adapted decomposition used to block-diagonalize the SDP.

The space of polynomials of degree <= d in u, v, t carries the permutation
action of S3.  It splits into three isotypic components (trivial, alternating,
and the 2-dimensional "standard" type), and the split is computed here
orbit-by-orbit, exactly over Q:

* every monomial orbit contributes one trivial vector (the orbit sum);
* orbits of size 6 contribute one alternating vector (the signed orbit sum);
* orbits of size 3 contribute one standard copy, orbits of size 6 two copies.

Standard copies are produced with the classical transfer projections built
from a fixed 2x2 orthogonal realization of the standard irrep.  Those
matrices contain sqrt(3)/2 entries, but the second-component transfer
operator is (sqrt(3)) x (a rational combination of the six permutation
operators).  Each copy is therefore stored as a pair (x1, w) of *rational*
vectors whose true second component is sqrt(3)*w; all downstream quantities
(kernel matrices of products, block expansions) only ever need x2 in even
powers, so everything stays in Q.  Pairs share one scale factor, which is the
consistency the block-diagonalization argument needs; absolute normalization
is irrelevant, so vectors are rescaled by exact powers of two to keep squared
norms in [1, 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations as _itertools_perms
from math import comb

from .poly import Mono, Poly, PolyMatrix, monomials_upto

Perm = tuple[int, int, int]  # perm[i] = image of coordinate slot i

IDENTITY: Perm = (0, 1, 2)
S3: tuple[Perm, ...] = tuple(sorted(_itertools_perms(range(3))))


def compose(a: Perm, b: Perm) -> Perm:
    """a after b."""
    return (a[b[0]], a[b[1]], a[b[2]])


def inverse(a: Perm) -> Perm:
    out = [0, 0, 0]
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)  # type: ignore[return-value]


def sign(a: Perm) -> int:
    inversions = sum(
        1 for i in range(3) for j in range(i + 1, 3) if a[i] > a[j]
    )
    return -1 if inversions % 2 else 1


def permute_mono(sigma: Perm, m: Mono) -> Mono:
    """Exponent triple of the sigma-image of the monomial m."""
    out = [0, 0, 0]
    for i in range(3):
        out[sigma[i]] = m[i]
    return (out[0], out[1], out[2])


def act(sigma: Perm, p: Poly) -> Poly:
    """Left action: (sigma p)(x) = p(sigma^{-1} x), i.e. permute variables."""
    return p.map_monomials(lambda m: permute_mono(sigma, m))


def symmetrize(p: Poly) -> Poly:
    """Group average (1/6) sum of all six images."""
    total = Poly()
    for sigma in S3:
        total = total + act(sigma, p)
    return total / 6


def orbit_rep(m: Mono) -> Mono:
    """Canonical orbit representative: exponents sorted descending."""
    a, b, c = sorted(m, reverse=True)
    return (a, b, c)


def orbit_monos(rep: Mono) -> list[Mono]:
    return sorted({permute_mono(s, rep) for s in S3})


def orbit_size(rep: Mono) -> int:
    a, b, c = rep
    if a == b == c:
        return 1
    if a == b or b == c:
        return 3
    return 6


def orbit_reps_upto(D: int) -> list[Mono]:
    """Orbit representatives of all monomials of degree <= D, graded order."""
    seen = []
    have = set()
    for m in monomials_upto(D):
        r = orbit_rep(m)
        if r not in have:
            have.add(r)
            seen.append(r)
    return seen


def orbit_coefficients(p: Poly, *, require_invariant: bool) -> dict[Mono, Fraction]:
    """Coefficients of p grouped by orbit.

    With require_invariant=True the result maps each orbit representative to
    the (asserted common) coefficient at every orbit member — the exact
    expansion of an invariant polynomial over orbit sums.  With
    require_invariant=False it maps the representative to the *sum* of
    coefficients over the orbit (the value of the orbit's coordinate
    functional on an arbitrary polynomial).
    """
    groups: dict[Mono, list] = {}
    for m, c in p.terms.items():
        groups.setdefault(orbit_rep(m), []).append((m, c))
    out: dict[Mono, Fraction] = {}
    for rep, pairs in groups.items():
        if require_invariant:
            vals = {c for _, c in pairs}
            if len(vals) != 1 or len(pairs) != orbit_size(rep):
                raise ValueError(
                    f"polynomial is not S3-invariant at orbit {rep}: {pairs}"
                )
            out[rep] = pairs[0][1]
        else:
            out[rep] = sum((c for _, c in pairs), Fraction(0))
    return out


# ---------------------------------------------------------------------------
# invariant bases

_P1 = Poly({(1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1})
_P2 = Poly({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
_P3 = Poly({(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})


def power_sum_triples(D: int) -> list[tuple[int, int, int]]:
    out = [
        (a, b, c)
        for c in range(D // 3 + 1)
        for b in range((D - 3 * c) // 2 + 1)
        for a in range(D - 2 * b - 3 * c + 1)
    ]
    out.sort(key=lambda t: (t[0] + 2 * t[1] + 3 * t[2], t))
    return out


def invariant_basis(D: int) -> list[Poly]:
    """Products p1^a p2^b p3^c of power sums with a + 2b + 3c <= D.

    These span (and are a basis of) the invariant polynomials of degree <= D.
    """
    cache: dict[tuple[int, int], Poly] = {}

    def pw(which: int, e: int) -> Poly:
        key = (which, e)
        if key not in cache:
            if e == 0:
                cache[key] = Poly.const(1)
            else:
                cache[key] = pw(which, e - 1) * (_P1, _P2, _P3)[which]
        return cache[key]

    return [
        pw(0, a) * pw(1, b) * pw(2, c) for a, b, c in power_sum_triples(D)
    ]


def orbit_basis(D: int) -> list[Poly]:
    """Monomial orbit sums of degree <= D — the cheap exact invariant basis."""
    return [
        Poly({m: 1 for m in orbit_monos(rep)}) for rep in orbit_reps_upto(D)
    ]


# ---------------------------------------------------------------------------
# the 2x2 orthogonal realization of the standard irrep
#
# Entries are p + q*sqrt(3), stored as (p, q) with p, q rational; every entry
# of every group element is "pure" (p = 0 or q = 0).  The realization places
# the three coordinate slots at plane angles 90°, 210°, 330° and maps a
# permutation to the isometry permuting those three points.

_H = Fraction(1, 2)
_R3Entry = tuple[Fraction, Fraction]  # value = first + second * sqrt(3)


def _pure(p="0", q="0") -> _R3Entry:
    return (Fraction(p), Fraction(q))


STD_REALIZATION: dict[Perm, tuple[tuple[_R3Entry, _R3Entry], tuple[_R3Entry, _R3Entry]]] = {
    (0, 1, 2): ((_pure(1), _pure()), (_pure(), _pure(1))),
    # 3-cycle u->v->t->u: rotation by +120 degrees
    (1, 2, 0): ((_pure(-_H), _pure(0, -_H)), (_pure(0, _H), _pure(-_H))),
    # 3-cycle u->t->v->u: rotation by +240 degrees
    (2, 0, 1): ((_pure(-_H), _pure(0, _H)), (_pure(0, -_H), _pure(-_H))),
    # swap v,t: reflection about the 90-degree axis
    (0, 2, 1): ((_pure(-1), _pure()), (_pure(), _pure(1))),
    # swap u,t: reflection about the 210-degree axis
    (2, 1, 0): ((_pure(_H), _pure(0, _H)), (_pure(0, _H), _pure(-_H))),
    # swap u,v: reflection about the 330-degree axis
    (1, 0, 2): ((_pure(_H), _pure(0, -_H)), (_pure(0, -_H), _pure(-_H))),
}


def _transfer_weights() -> tuple[dict[Perm, Fraction], dict[Perm, Fraction]]:
    """Weights of the projection onto first components and of the
    (sqrt(3)-divided) first-to-second transfer operator.

    P_ab := (dim/|G|) * sum_s R(s)_ab rho_{s^{-1}}; reindexing by s^{-1} and
    using orthogonality R(s^{-1}) = R(s)^T gives weight R(s)_ba on rho_s.
    P_11 picks rational parts of the (1,1) entries; P_12 picks the (2,1)
    entries, all of which are pure sqrt(3) multiples — the common sqrt(3) is
    divided out here and reinstated implicitly by downstream squaring.
    """
    w11: dict[Perm, Fraction] = {}
    w12: dict[Perm, Fraction] = {}
    third = Fraction(1, 3)
    for s, mat in STD_REALIZATION.items():
        r11_rat, r11_irr = mat[0][0]
        r21_rat, r21_irr = mat[1][0]
        if r11_irr or r21_rat:
            raise AssertionError("realization entries lost purity")
        w11[s] = third * r11_rat
        w12[s] = third * r21_irr
    return w11, w12


_W11, _W12 = _transfer_weights()


def project_first_component(p: Poly) -> Poly:
    """Projection onto the span of the standard copies' first vectors."""
    total = Poly()
    for s, w in _W11.items():
        if w:
            total = total + act(s, p) * w
    return total


def transfer_to_second(x1: Poly) -> Poly:
    """w with sqrt(3)*w the second component matching the copy of x1."""
    total = Poly()
    for s, w in _W12.items():
        if w:
            total = total + act(s, x1) * w
    return total


def _dot(p: Poly, q: Poly) -> Fraction:
    if len(p.terms) > len(q.terms):
        p, q = q, p
    return sum((c * q.terms[m] for m, c in p.terms.items() if m in q.terms), Fraction(0))


def _norm_sq(p: Poly) -> Fraction:
    return sum((c * c for c in p.terms.values()), Fraction(0))


def _pow2_rescale(norm_sq: Fraction) -> Fraction:
    """Exact power of two s with norm_sq * s^2 in [1, 4)."""
    if norm_sq <= 0:
        raise ValueError("cannot rescale the zero vector")
    s = Fraction(1)
    while norm_sq * s * s >= 4:
        s /= 2
    while norm_sq * s * s < 1:
        s *= 2
    return s


@dataclass(frozen=True)
class SymmetryAdaptedBasis:
    """Isotypic decomposition of the degree-<=d polynomial space.

    `standard` holds pairs (x1, w); the actual second basis vector of the
    copy is sqrt(3)*w.  Counts (a, b, c) = (#trivial, #alternating, #copies)
    satisfy a + b + 2c = C(d+3, 3).
    """

    d: int
    trivial: tuple[Poly, ...]
    alternating: tuple[Poly, ...]
    standard: tuple[tuple[Poly, Poly], ...]

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.trivial), len(self.alternating), len(self.standard))


@lru_cache(maxsize=None)
def symmetry_adapted_basis(d: int) -> SymmetryAdaptedBasis:
    if d < 0:
        raise ValueError("degree must be nonnegative")
    trivial: list[Poly] = []
    alternating: list[Poly] = []
    standard: list[tuple[Poly, Poly]] = []

    for rep in orbit_reps_upto(d):
        members = orbit_monos(rep)
        size = len(members)

        t = Poly({m: 1 for m in members})
        trivial.append(t * _pow2_rescale(_norm_sq(t)))

        if size == 6:
            alt = Poly(
                (permute_mono(s, rep), sign(s)) for s in S3
            )
            alternating.append(alt * _pow2_rescale(_norm_sq(alt)))

        if size == 1:
            continue

        # seeds for the standard copies inside this orbit: project each
        # member, keep an orthogonal independent set (exact Gram-Schmidt,
        # no normalization — orbits have disjoint support so cross-orbit
        # orthogonality is automatic)
        copies_expected = 1 if size == 3 else 2
        firsts: list[Poly] = []
        for m in members:
            y = project_first_component(Poly.monomial(m))
            for prev in firsts:
                y = y - prev * (_dot(y, prev) / _norm_sq(prev))
            if y:
                firsts.append(y)
            if len(firsts) == copies_expected:
                break
        if len(firsts) != copies_expected:
            raise AssertionError(
                f"orbit {rep}: found {len(firsts)} standard copies, "
                f"expected {copies_expected}"
            )
        for x1 in firsts:
            s = _pow2_rescale(_norm_sq(x1))
            standard.append((x1 * s, transfer_to_second(x1) * s))

    basis = SymmetryAdaptedBasis(
        d, tuple(trivial), tuple(alternating), tuple(standard)
    )
    a, b, c = basis.counts
    if a + b + 2 * c != comb(d + 3, 3):
        raise AssertionError(
            f"dimension bookkeeping broken at d={d}: {a}+{b}+2*{c} != C(d+3,3)"
        )
    return basis


@dataclass(frozen=True)
class IsotypicVMatrices:
    """Kernel matrices of the three isotypic components.

    A polynomial of degree <= 2d is an invariant sum of squares exactly when
    it is <V_trv, Q1> + <V_alt, Q2> + <V_std, Q3> with the three Q positive
    semidefinite.
    """

    d: int
    v_trv: PolyMatrix
    v_alt: PolyMatrix
    v_std: PolyMatrix


@lru_cache(maxsize=None)
def v_matrices(d: int) -> IsotypicVMatrices:
    basis = symmetry_adapted_basis(d)

    def gram_like(vectors: tuple[Poly, ...]) -> PolyMatrix:
        n = len(vectors)
        ent = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                p = vectors[i] * vectors[j]
                ent[i][j] = p
                if j != i:
                    ent[j][i] = p
        return PolyMatrix([[x for x in row] for row in ent]) if n else PolyMatrix([])

    def gram_standard(pairs) -> PolyMatrix:
        n = len(pairs)
        ent = [[None] * n for _ in range(n)]
        for i in range(n):
            x1i, wi = pairs[i]
            for j in range(i, n):
                x1j, wj = pairs[j]
                p = x1i * x1j + 3 * (wi * wj)
                ent[i][j] = p
                if j != i:
                    ent[j][i] = p
        return PolyMatrix([[x for x in row] for row in ent]) if n else PolyMatrix([])

    return IsotypicVMatrices(
        d,
        gram_like(basis.trivial),
        gram_like(basis.alternating),
        gram_standard(basis.standard),
    )


def basis_coefficient_rows(
    vectors, monos: list[Mono]
) -> list[list[Fraction]]:
    """Coefficient matrix (one row per vector) over a fixed monomial list."""
    index = {m: i for i, m in enumerate(monos)}
    rows = []
    for vec in vectors:
        row = [Fraction(0)] * len(monos)
        for m, c in vec.terms.items():
            row[index[m]] = c
        rows.append(row)
    return rows
