"""Exact trivariate polynomial arithmetic.

Everything here is over Q: the ring axioms are checked with hypothesis on
randomly generated sparse polynomials, and evaluation/composition are pinned
against hand-expanded examples.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kissbound.poly import (
    ONE,
    Poly,
    PolyMatrix,
    T,
    U,
    V,
    monomials_upto,
    u_power,
    univariate_coeffs,
)

coefficients = st.fractions(
    min_value=-4, max_value=4, max_denominator=16
).filter(lambda f: f != 0)
monomials = st.tuples(
    st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)
)
polys = st.builds(
    Poly, st.dictionaries(monomials, coefficients, max_size=5)
)
points = st.tuples(
    st.fractions(min_value=-2, max_value=2, max_denominator=8),
    st.fractions(min_value=-2, max_value=2, max_denominator=8),
    st.fractions(min_value=-2, max_value=2, max_denominator=8),
)


@settings(max_examples=150, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p + q == q + p
    assert p - p == Poly.zero()
    assert p * ONE == p
    assert p * Poly.zero() == Poly.zero()


@settings(max_examples=150, deadline=None)
@given(polys, polys, points)
def test_eval_is_a_ring_homomorphism(p, q, pt):
    assert (p + q).eval(pt) == p.eval(pt) + q.eval(pt)
    assert (p * q).eval(pt) == p.eval(pt) * q.eval(pt)


@settings(max_examples=60, deadline=None)
@given(polys, points)
def test_compose_agrees_with_eval(p, pt):
    images = (Poly.const(pt[0]), Poly.const(pt[1]), Poly.const(pt[2]))
    assert p.compose(images) == Poly.const(p.eval(pt))


def test_constructor_merges_duplicate_pairs():
    p = Poly([((1, 0, 0), 2), ((1, 0, 0), 3), ((0, 0, 0), 1)])
    assert p == 5 * U + 1
    assert Poly([((1, 0, 0), 1), ((1, 0, 0), -1)]) == Poly.zero()


def test_zero_coefficients_are_dropped():
    p = U - U
    assert not p
    assert p.degree == -1  # degree of the zero polynomial
    assert p.coeff((1, 0, 0)) == 0


def test_square_of_binomial():
    p = (U + V) ** 2
    assert p == U * U + 2 * U * V + V * V
    assert p.coeff((1, 1, 0)) == 2
    assert p.degree == 2


def test_scalar_operations_accept_ints_and_fractions():
    p = U / 2 + Fraction(1, 3)
    assert p.coeff((1, 0, 0)) == Fraction(1, 2)
    assert (3 - p).coeff((0, 0, 0)) == Fraction(8, 3)
    assert (Fraction(2, 5) * V) == V * Fraction(2, 5)


def test_eval_example():
    p = 2 * U * V * T - T ** 3 + 1
    pt = (Fraction(1, 2), Fraction(-1, 3), Fraction(3))
    assert p.eval(pt) == 2 * Fraction(-1, 2) - 27 + 1


def test_pow_rejects_negative_exponent():
    with pytest.raises(ValueError):
        U ** -1


def test_u_power_and_univariate_coeffs_round_trip():
    p = 3 * u_power(4) - u_power(1) / 2 + 7
    assert univariate_coeffs(p, 4) == [
        Fraction(7),
        Fraction(-1, 2),
        Fraction(0),
        Fraction(0),
        Fraction(3),
    ]


def test_univariate_coeffs_rejects_other_variables():
    with pytest.raises(ValueError):
        univariate_coeffs(U + V, 2)
    with pytest.raises(ValueError):
        univariate_coeffs(u_power(3), 2)


def test_monomials_upto_counts_and_order():
    for deg in range(6):
        got = monomials_upto(deg)
        want = (deg + 1) * (deg + 2) * (deg + 3) // 6
        assert len(got) == want
        assert len(set(got)) == want
        assert all(sum(m) <= deg for m in got)
    # graded order: total degree never decreases
    degs = [sum(m) for m in monomials_upto(7)]
    assert degs == sorted(degs)


def test_map_monomials_substitution():
    p = U * V + T
    swapped = p.map_monomials(lambda m: (m[1], m[0], m[2]))
    assert swapped == p  # u*v is symmetric, t untouched
    collapsed = p.map_monomials(lambda m: (m[0] + m[1] + m[2], 0, 0))
    assert collapsed == u_power(2) + U


def test_poly_matrix_shape_and_symmetry():
    m = PolyMatrix([[ONE, U], [U, V]])
    assert m.dim == 2
    assert m.is_symmetric()
    assert m[0, 1] == U
    asym = PolyMatrix([[ONE, U], [V, ONE]])
    assert not asym.is_symmetric()
    with pytest.raises(ValueError):
        PolyMatrix([[ONE, U]])
