"""Gegenbauer-family polynomials and the positive-kernel matrices.

Everything is exact.  The polynomials attached to dimension n are the Jacobi
polynomials with both parameters (n-3)/2, normalized to value 1 at u = 1 —
their positivity property on the sphere S^{n-1} is what the whole bound rests
on.  The three-point kernels extend them: for k >= 0 and points with pairwise
inner products u, v, t, the degree-k kernel is a polynomial in u, v, t
(half-integer powers cancel by parity), and the (d-k+1)-square matrices of
products built from it are positive-semidefinite-sum generators for valid
three-point constraints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from .poly import ONE, Poly, PolyMatrix, T, U, V, univariate_coeffs
from .symmetry import S3, act


@lru_cache(maxsize=None)
def _jacobi_unnormalized(k: int, alpha: Fraction) -> Poly:
    """Classical three-term recurrence with both Jacobi parameters alpha."""
    if k == 0:
        return ONE
    if k == 1:
        return (alpha + 1) * U
    two_a = 2 * alpha
    a = 2 * k * (k + two_a) * (2 * k + two_a - 2)
    b = (2 * k + two_a - 1) * (2 * k + two_a) * (2 * k + two_a - 2)
    c = 2 * (k + alpha - 1) ** 2 * (2 * k + two_a)
    prev1 = _jacobi_unnormalized(k - 1, alpha)
    prev2 = _jacobi_unnormalized(k - 2, alpha)
    return (b * U * prev1 - c * prev2) / a


@lru_cache(maxsize=None)
def _jacobi_equal_params(k: int, alpha: Fraction) -> Poly:
    """Jacobi polynomial with both parameters alpha, normalized to 1 at u=1.

    Every coefficient is an exact rational; alpha down to -1/2 inclusive is
    supported (-1/2 is the Chebyshev end of the family).
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    if alpha < Fraction(-1, 2):
        raise ValueError(f"parameter {alpha} below the supported range")
    p = _jacobi_unnormalized(k, alpha)
    return p / p.eval((1, 0, 0))


def jacobi(k: int, n: int) -> Poly:
    """Degree-k polynomial of the dimension-n family, univariate in u.

    Normalized so jacobi(k, n)(1) = 1.  Requires n >= 3.
    """
    if n < 3:
        raise ValueError(f"dimension n={n} out of range (need n >= 3)")
    return _jacobi_equal_params(k, Fraction(n - 3, 2))


@lru_cache(maxsize=None)
def q_kernel(k: int, n: int) -> Poly:
    """Three-point kernel of degree k for dimension n, exact in u, v, t.

    Built from the dimension-(n-1) family evaluated at the normalized third
    coordinate: each power x^j (j = k, k-2, ...) becomes
    (t - u v)^j * ((1-u^2)(1-v^2))^{(k-j)/2}, which is polynomial because the
    surviving powers share the parity of k.  For n = 3 the inner family sits
    at the parameter boundary -1/2 (the Chebyshev end); the recurrence is
    still exact there, so n = 3 is allowed.
    """
    if n < 3:
        raise ValueError(f"dimension n={n} out of range (need n >= 3)")
    if k < 0:
        raise ValueError("degree must be nonnegative")
    inner = _jacobi_equal_params(k, Fraction(n - 4, 2))
    coeffs = univariate_coeffs(inner, k)
    t_minus_uv = T - U * V
    bracket = (ONE - U * U) * (ONE - V * V)
    tm_pows = {0: ONE}
    br_pows = {0: ONE}

    def pw(table, base, e):
        if e not in table:
            table[e] = pw(table, base, e - 1) * base
        return table[e]

    total = Poly()
    for j, cj in enumerate(coeffs):
        if not cj:
            continue
        if (k - j) % 2:
            raise AssertionError(
                f"kernel parity violated: coefficient at x^{j} in degree {k}"
            )
        total = total + cj * pw(tm_pows, t_minus_uv, j) * pw(
            br_pows, bracket, (k - j) // 2
        )
    return total


@dataclass(frozen=True)
class SdpShape:
    """Size parameters of one bound computation.

    n: sphere dimension (points live on S^{n-1}), n >= 3.
    d: truncation degree, d >= 1; the degree-k kernel matrix is
       (d-k+1)-square, so columns shrink as k grows.
    cos_theta: cosine of the minimal angle (1/2 for the kissing problem).
    """

    n: int
    d: int
    cos_theta: Fraction

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"dimension n={self.n} out of range (need n >= 3)")
        if self.d < 1:
            raise ValueError(f"degree d={self.d} out of range (need d >= 1)")
        if not isinstance(self.cos_theta, Rational):
            raise TypeError("cos_theta must be exact (int or Fraction)")
        if not -1 < self.cos_theta < 1:
            raise ValueError(f"cos_theta={self.cos_theta} not in (-1, 1)")


def _subst_var(p: Poly, which: int) -> Poly:
    """Move a u-univariate polynomial onto the v (which=1) or t (which=2) axis."""
    if which == 0:
        return p

    def mv(m):
        out = [0, 0, 0]
        out[which] = m[0]
        return (out[0], out[1], out[2])

    return p.map_monomials(mv)


def y_matrix(k: int, shape: SdpShape) -> PolyMatrix:
    """One-sided kernel matrix: entry (i, j) = p_i(u) p_j(v) q_k(u, v, t).

    Square of size d-k+1 (rows indexed by degree 0..d-k in the shifted
    family for dimension n+2k).  Not symmetric entrywise — only its group
    average is; see s_matrix.
    """
    if not 0 <= k <= shape.d:
        raise ValueError(f"k={k} out of range 0..{shape.d}")
    dim = shape.d - k + 1
    fam = shape.n + 2 * k
    q = q_kernel(k, shape.n)
    in_u = [jacobi(i, fam) for i in range(dim)]
    in_v = [_subst_var(p, 1) for p in in_u]
    return PolyMatrix(
        [[in_u[i] * in_v[j] * q for j in range(dim)] for i in range(dim)]
    )


@lru_cache(maxsize=None)
def _s_matrix_cached(k: int, n: int, d: int) -> PolyMatrix:
    y = y_matrix(k, SdpShape(n, d, Fraction(1, 2)))
    dim = y.dim
    ent = [[Poly() for _ in range(dim)] for _ in range(dim)]
    for sigma in S3:
        for i in range(dim):
            row = y.entries[i]
            for j in range(dim):
                ent[i][j] = ent[i][j] + act(sigma, row[j])
    out = PolyMatrix([[p / 6 for p in row] for row in ent])
    return out


def s_matrix(k: int, shape: SdpShape) -> PolyMatrix:
    """Symmetrized kernel matrix: entrywise group average of y_matrix.

    Every entry is exactly S3-invariant and the matrix is exactly symmetric.
    """
    if not 0 <= k <= shape.d:
        raise ValueError(f"k={k} out of range 0..{shape.d}")
    return _s_matrix_cached(k, shape.n, shape.d)
