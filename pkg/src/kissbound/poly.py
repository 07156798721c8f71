"""Sparse exact polynomials in the three variables u, v, t.

Coefficients are `fractions.Fraction`, monomials are exponent triples
(e_u, e_v, e_t).  Everything downstream — orthogonal polynomials, symmetrized
kernel matrices, SDP rows, certification residuals — is built on this type,
so it stays small and strict: floats never enter, and zero coefficients are
dropped eagerly so that `terms` is always a minimal support map.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

Mono = tuple[int, int, int]
Coef = Union[int, Fraction]

ZERO_MONO: Mono = (0, 0, 0)


def _coerce(c: Coef) -> Fraction:
    if type(c) is Fraction:
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"coefficient must be int or Fraction, got {type(c).__name__}")


def _check_mono(m: Mono) -> Mono:
    if (
        type(m) is not tuple
        or len(m) != 3
        or not all(isinstance(e, int) and e >= 0 for e in m)
    ):
        raise ValueError(f"monomial must be a triple of nonnegative ints, got {m!r}")
    return m


class Poly:
    """Immutable-by-convention sparse polynomial over Q[u, v, t]."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Mono, Coef] | Iterable[tuple[Mono, Coef]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Mono, Fraction] = {}
        for m, c in items:
            _check_mono(m)
            c = _coerce(c)
            if m in acc:
                c = acc[m] + c
            if c:
                acc[m] = c
            else:
                acc.pop(m, None)
        self.terms = acc

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return Poly()

    @staticmethod
    def const(c: Coef) -> "Poly":
        return Poly({ZERO_MONO: c})

    @staticmethod
    def monomial(m: Mono, c: Coef = 1) -> "Poly":
        return Poly({m: c})

    # -- ring structure ----------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, _F0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return _raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return _raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            c0 = _coerce(other)
            if not c0:
                return Poly()
            return _raw({m: c * c0 for m, c in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        # classic sparse convolution; fine for the term counts we see here
        out: dict[Mono, Fraction] = {}
        for (a0, a1, a2), ca in self.terms.items():
            for (b0, b1, b2), cb in other.terms.items():
                m = (a0 + b0, a1 + b1, a2 + b2)
                s = out.get(m, _F0) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return _raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / _coerce(other))
        return NotImplemented

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative int")
        result = Poly.const(1)
        base = self
        while k:  # square-and-multiply
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None  # mutable dict inside; equality is by content

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- queries -----------------------------------------------------------

    def coeff(self, m: Mono) -> Fraction:
        return self.terms.get(_check_mono(m), _F0)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def eval(self, point: tuple[Coef, Coef, Coef]) -> Fraction:
        pu, pv, pt = (_coerce(x) for x in point)
        total = _F0
        pows: dict[Mono, Fraction] = {}
        for (a, b, c), coef in self.terms.items():
            key = (a, b, c)
            val = pows.get(key)
            if val is None:
                val = pu**a * pv**b * pt**c
                pows[key] = val
            total += coef * val
        return total

    def compose(self, images: tuple["Poly", "Poly", "Poly"]) -> "Poly":
        """Substitute polynomials for u, v, t (powers cached per variable)."""
        caches: list[dict[int, Poly]] = [
            {0: Poly.const(1), 1: img} for img in images
        ]

        def power(i: int, e: int) -> Poly:
            cache = caches[i]
            if e not in cache:
                cache[e] = power(i, e - 1) * cache[1]
            return cache[e]

        total = Poly()
        for (a, b, c), coef in self.terms.items():
            term = Poly.const(coef)
            if a:
                term = term * power(0, a)
            if b:
                term = term * power(1, b)
            if c:
                term = term * power(2, c)
            total = total + term
        return total

    def map_monomials(self, f) -> "Poly":
        """Rebuild with monomials replaced by f(m); coefficients merge."""
        return Poly((f(m), c) for m, c in self.terms.items())

    # -- display -----------------------------------------------------------

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for m in sorted(self.terms, key=lambda m: (sum(m), m), reverse=True):
            c = self.terms[m]
            name = "".join(
                f"{var}^{e}" if e > 1 else var
                for var, e in zip("uvt", m)
                if e
            )
            bits.append(f"{c}" if not name else (f"{c}*{name}" if c != 1 else name))
        return " + ".join(bits)


_F0 = Fraction(0)


def _raw(terms: dict[Mono, Fraction]) -> Poly:
    """Wrap an already-clean dict without re-validating (internal fast path)."""
    p = Poly.__new__(Poly)
    p.terms = terms
    return p


def _as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    return NotImplemented


ONE = Poly.const(1)
U = Poly.monomial((1, 0, 0))
V = Poly.monomial((0, 1, 0))
T = Poly.monomial((0, 0, 1))


def u_power(k: int) -> Poly:
    """u^k as a polynomial (the univariate SOS bases live on the u axis)."""
    return Poly.monomial((k, 0, 0))


def monomials_upto(deg: int) -> list[Mono]:
    """All monomials of total degree <= deg, graded-lexicographic order.

    This fixed enumeration is the index convention every monomial-basis
    matrix in the package uses.
    """
    if deg < 0:
        return []
    out = []
    for total in range(deg + 1):
        for a in range(total, -1, -1):
            for b in range(total - a, -1, -1):
                out.append((a, b, total - a - b))
    return out


def univariate_coeffs(p: Poly, max_deg: int) -> list[Fraction]:
    """Coefficient list [c_0 .. c_max_deg] of a polynomial in u alone."""
    out = [_F0] * (max_deg + 1)
    for (a, b, c), coef in p.terms.items():
        if b or c:
            raise ValueError("polynomial is not univariate in u")
        if a > max_deg:
            raise ValueError(f"degree {a} exceeds stated bound {max_deg}")
        out[a] = coef
    return out


class PolyMatrix:
    """Square matrix of Poly entries.

    Symmetry is *not* enforced at construction: the one-sided kernel matrix
    (entry (i,j) carrying p_i(u) p_j(v) x kernel) is genuinely asymmetric and
    only its group average is symmetric.  Callers that need symmetry assert
    `is_symmetric()`.
    """

    __slots__ = ("dim", "entries")

    def __init__(self, entries: list[list[Poly]]):
        n = len(entries)
        for row in entries:
            if len(row) != n:
                raise ValueError("matrix must be square")
        self.dim = n
        self.entries = entries

    def __getitem__(self, ij: tuple[int, int]) -> Poly:
        i, j = ij
        return self.entries[i][j]

    def is_symmetric(self) -> bool:
        return all(
            self.entries[i][j] == self.entries[j][i]
            for i in range(self.dim)
            for j in range(i + 1, self.dim)
        )

    def map_entries(self, f) -> "PolyMatrix":
        return PolyMatrix([[f(p) for p in row] for row in self.entries])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolyMatrix)
            and self.dim == other.dim
            and self.entries == other.entries
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"PolyMatrix(dim={self.dim})"
