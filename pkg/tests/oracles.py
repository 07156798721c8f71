"""Independent test-side oracles, written before the tests that use them.

Nothing here imports from the package's math modules: the orthogonal
polynomials are re-derived by Gram-Schmidt against exact weighted moments,
and monomial orbits are enumerated by brute force, so agreement with the
package is evidence rather than tautology.
"""

from fractions import Fraction
from itertools import permutations


def normalized_moments(alpha: Fraction, max_m: int) -> list[Fraction]:
    """Moments of the weight (1-u^2)^alpha on [-1,1], divided by the mass.

    I(m) = integral of u^m (1-u^2)^alpha; odd moments vanish and
    I(m)/I(m-2) = (m-1)/(m+2*alpha+1), so every ratio I(m)/I(0) is rational
    even when alpha is a half-integer.
    """
    alpha = Fraction(alpha)
    out = [Fraction(0)] * (max_m + 1)
    out[0] = Fraction(1)
    for m in range(2, max_m + 1, 2):
        out[m] = out[m - 2] * (m - 1) / (m + 2 * alpha + 1)
    return out


def weighted_inner(
    p: list[Fraction], q: list[Fraction], alpha: Fraction
) -> Fraction:
    """<p, q> under (1-u^2)^alpha, in units of the weight's mass."""
    moments = normalized_moments(alpha, len(p) + len(q))
    total = Fraction(0)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                total += a * b * moments[i + j]
    return total


def gram_schmidt_orthopoly(k: int, alpha: Fraction) -> list[Fraction]:
    """Coefficients (constant first) of the k-th orthogonal polynomial for
    the weight (1-u^2)^alpha, normalized to the value 1 at u = 1."""
    basis: list[list[Fraction]] = []
    for deg in range(k + 1):
        e = [Fraction(0)] * (deg + 1)
        e[deg] = Fraction(1)
        for prev in basis:
            c = weighted_inner(e, prev, alpha) / weighted_inner(
                prev, prev, alpha
            )
            for i, b in enumerate(prev):
                e[i] -= c * b
        basis.append(e)
    e = basis[k]
    at_one = sum(e)
    return [c / at_one for c in e]


def orbit_of_monomial(m: tuple[int, int, int]) -> frozenset:
    """All coordinate shuffles of an exponent triple."""
    return frozenset(tuple(m[p[i]] for i in range(3)) for p in permutations(range(3)))


def brute_force_orbits(max_deg: int) -> set[frozenset]:
    """Every orbit of exponent triples with total degree <= max_deg."""
    seen: set[frozenset] = set()
    for a in range(max_deg + 1):
        for b in range(max_deg + 1 - a):
            for c in range(max_deg + 1 - a - b):
                seen.add(orbit_of_monomial((a, b, c)))
    return seen
