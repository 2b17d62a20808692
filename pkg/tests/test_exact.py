import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from aperiodica.exact import (ONE, I_UNIT, J_UNIT, K_UNIT, TAU, Golden, Icosian, PAdicApprox,
                              format_golden, golden_conjugate, icosian_generators,
                              icosian_multiply, is_prime, padic_distance, padic_valuation,
                              parse_golden)

SQRT5 = math.sqrt(5)

rat = st.fractions(min_value=-50, max_value=50, max_denominator=12)
goldens = st.builds(Golden, rat, rat)
small_int = st.integers(-6, 6)


# -- golden field --------------------------------------------------------------

def test_conjugate_examples():
    assert golden_conjugate(Golden(0, 1)) == Golden(1, -1)
    assert golden_conjugate(Golden(1)) == Golden(1)
    assert golden_conjugate(Golden(2, 3)) == Golden(5, -3)


@given(goldens, goldens)
def test_conjugate_is_ring_automorphism(x, y):
    c = golden_conjugate
    assert c(x + y) == c(x) + c(y)
    assert c(x * y) == c(x) * c(y)
    assert c(c(x)) == x


@given(goldens, goldens)
def test_real_embedding(x, y):
    val = lambda g: float(g.a) + float(g.b) * (1 + SQRT5) / 2
    assert float(x) == pytest.approx(val(x), abs=1e-9)
    assert float(x * y) == pytest.approx(val(x) * val(y), rel=1e-9, abs=1e-9)
    conj = float(x.a) + float(x.b) * (1 - SQRT5) / 2
    assert float(golden_conjugate(x)) == pytest.approx(conj, abs=1e-9)


@given(goldens)
def test_field_inverse_and_order(x):
    if x:
        assert x * x.inverse() == Golden(1)
        assert (x / x) == Golden(1)
    # exact order agrees with the float embedding away from ties
    y = x + Golden(Fraction(1, 7), Fraction(-1, 3))
    if abs(float(x) - float(y)) > 1e-9:
        assert (x < y) == (float(x) < float(y))


@given(goldens)
def test_format_parse_roundtrip(x):
    assert parse_golden(format_golden(x)) == x


def test_tau_identities():
    t = Golden(0, 1)
    assert t * t == t + 1
    assert float(t) == pytest.approx(TAU)
    assert t.norm() == -1


# -- icosians ------------------------------------------------------------------

def _hamilton(p, q):
    """Hamilton product written out from the multiplication table."""
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2)


def test_quaternion_units():
    assert I_UNIT * J_UNIT == K_UNIT
    assert J_UNIT * K_UNIT == I_UNIT
    assert K_UNIT * I_UNIT == J_UNIT
    assert I_UNIT * I_UNIT == Icosian((-2, 0, 0, 0, 0, 0, 0, 0))
    assert J_UNIT * I_UNIT == Icosian(tuple(-x for x in K_UNIT.v))


def test_square_of_half_sum_against_hand_expansion():
    h = Fraction(1, 2)
    q = Icosian.from_components(h, h, h, h)
    expected = _hamilton((Golden(h),) * 4, (Golden(h),) * 4)
    assert expected == (Golden(-h), Golden(h), Golden(h), Golden(h))
    assert (q * q).components == expected


_UNITS = icosian_generators()


def _ring_element(terms):
    q = Icosian((0,) * 8)
    for idx, c in terms:
        q = q + Icosian(tuple(c * x for x in _UNITS[idx].v))
    return q


# integer combinations of unit icosians stay in the icosian ring
icosians = st.lists(st.tuples(st.integers(0, 119), small_int), min_size=1, max_size=4).map(_ring_element)


@given(icosians)
def test_identity(q):
    assert ONE * q == q
    assert q * ONE == q
    assert icosian_multiply(ONE, q) == q


@given(icosians, icosians)
def test_product_matches_hamilton_oracle(p, q):
    assert (p * q).components == _hamilton(p.components, q.components)


@given(icosians, icosians, icosians)
def test_associative_and_norm_multiplicative(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert (p * q).norm() == p.norm() * q.norm()


def test_generators_are_120_units():
    G = icosian_generators()
    assert len(G) == 120
    assert len(set(G)) == 120
    assert all(g.norm() == Golden(1) for g in G)


def test_generators_closed_under_multiplication():
    G = icosian_generators()
    S = set(G)
    assert all(a * b in S for a, b in product(G, G))


def test_star_and_bar():
    G = icosian_generators()
    S = set(G)
    for g in G:
        assert g * g.bar() == ONE
        assert g.bar() in S
        # the Galois conjugate is a unit of the conjugate ring, not of this one
        assert g.star().norm() == Golden(1)
    assert any(g.star() not in S for g in G)


@given(icosians, icosians)
def test_star_is_ring_homomorphism(p, q):
    assert (p * q).star() == p.star() * q.star()
    assert p.star().norm() == golden_conjugate(p.norm())


# -- p-adics -------------------------------------------------------------------

def test_valuation_examples():
    assert padic_valuation(12, 2) == 2
    assert padic_valuation(0, 5) == math.inf
    assert padic_valuation(Fraction(5, 9), 3) == -2


def test_distance_examples():
    assert padic_distance(0, 8, 2) == Fraction(1, 8)
    assert padic_distance(Fraction(3, 7), Fraction(3, 7), 5) == 0
    # 4/3 - 1/3 = 1 is a 3-adic unit; 2/3 - 1/3 = 1/3 has valuation -1
    assert padic_distance(Fraction(1, 3), Fraction(4, 3), 3) == 1
    assert padic_distance(Fraction(1, 3), Fraction(2, 3), 3) == 3


def test_non_prime_rejected():
    assert not is_prime(1) and not is_prime(9) and is_prime(97)
    with pytest.raises(ValueError):
        padic_valuation(4, 6)


nonzero_rat = st.fractions(min_value=-1000, max_value=1000, max_denominator=200)


@given(nonzero_rat, nonzero_rat, nonzero_rat, st.sampled_from([2, 3, 5, 7]))
def test_ultrametric(x, y, z, p):
    d = lambda a, b: padic_distance(a, b, p)
    assert d(x, z) <= max(d(x, y), d(y, z))
    assert d(x, y) == d(y, x)


@given(nonzero_rat, nonzero_rat, st.sampled_from([2, 3, 5]))
def test_valuation_oracle(x, y, p):
    if x == 0 or y == 0:
        return
    # direct count on numerator and denominator
    def nu(r):
        n, k = r.numerator, 0
        while n % p == 0:
            n //= p
            k += 1
        m, j = r.denominator, 0
        while m % p == 0:
            m //= p
            j += 1
        return k - j
    assert padic_valuation(x, p) == nu(x)
    assert padic_valuation(x * y, p) == nu(x) + nu(y)


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.sampled_from([2, 3, 5]),
       st.integers(1, 20))
def test_truncated_arithmetic_mod_pk(a, b, p, K):
    A, B = PAdicApprox.from_int(a, p, K), PAdicApprox.from_int(b, p, K)
    mod = p ** K
    assert int(A + B) == (a + b) % mod
    assert int(A * B) == (a * b) % mod
    assert int(A - B) == (a - b) % mod
    v = A.valuation()
    if a % mod:
        assert v == next(i for i, dig in enumerate(A.digits) if dig)
    else:
        assert v == math.inf


def test_fraction_expansion():
    x = PAdicApprox.from_fraction(Fraction(1, 3), 2, 8)
    assert int(x * 3) == 1
    assert x.digit_string() == "...10101011"
    assert PAdicApprox.from_digits([1, 1, 0, 1], 2).residue == 11
    with pytest.raises(ValueError):
        PAdicApprox.from_fraction(Fraction(1, 2), 2)
    assert x.congruent(11, 4)
