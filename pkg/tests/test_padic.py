from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import mod_inverse_rational
from rmc.padic import (OddValuation, PadicApprox, PrecisionLoss, QuadExtApprox, hensel_sqrt,
                       legendre, smallest_nonresidue, valuation)

PRIMES = st.sampled_from([3, 5, 7, 13])
nonzero_ints = st.integers(-10**9, 10**9).filter(lambda n: n != 0)


def rationals(p):
    return st.builds(Fraction, nonzero_ints, st.integers(1, 10**6))


@given(st.data(), PRIMES)
def test_field_operations_match_rational_reduction(data, p):
    N = 20
    x = data.draw(rationals(p))
    y = data.draw(rationals(p))
    X, Y = PadicApprox.from_rational(x, p, N), PadicApprox.from_rational(y, p, N)
    for exact, approx in ((x * y, X * Y), (x / y, X / Y)):
        assert approx == PadicApprox.from_rational(exact, p, N)
    s = x + y
    if s != 0:
        got = X + Y
        # addition keeps absolute precision; compare modulo p^absprec
        want = PadicApprox.from_rational(s, p, N + 10)
        assert got.val == want.val
        assert (got.unit - want.unit) % p**got.N == 0


@given(st.integers(1, 10**12), PRIMES)
def test_unit_part_round_trip(n, p):
    x = PadicApprox.from_rational(Fraction(n, 7 if p != 7 else 11), p, 15)
    assert x.val == valuation(n, p)
    lifted = x.lift()
    assert PadicApprox.from_rational(lifted, p, 15) == x


@given(st.integers(1, 10**6), PRIMES)
def test_hensel_square_root(a, p):
    N = 25
    a = a * a * (p * p if a % 3 == 0 else 1)
    r = hensel_sqrt(a, p, N)
    assert r * r == PadicApprox.from_rational(a, p, N)
    # canonical branch: the residue of the unit part is at most (p-1)/2
    assert r.unit % p <= (p - 1) // 2


def test_hensel_square_root_odd_valuation_raises():
    with pytest.raises(OddValuation):
        hensel_sqrt(3 * 4, 3, 10)


def test_sqrt_minus_one_mod_125():
    assert hensel_sqrt(-1, 5, 3).unit % 125 == 57


def test_smallest_nonresidue_and_legendre():
    assert smallest_nonresidue(3) == 2
    assert smallest_nonresidue(7) == 3
    assert [legendre(a, 7) for a in range(1, 7)] == [1, 1, -1, 1, -1, -1]


def test_subtraction_of_equal_values_is_precise_zero():
    x = PadicApprox.from_rational(Fraction(2, 3), 5, 10)
    z = x - x
    assert z.zero and z.absprec == 10


def test_rational_reduction_oracle_agrees_on_units():
    x = Fraction(17, 4)
    assert PadicApprox.from_rational(x, 3, 8).unit == mod_inverse_rational(x, 3, 8)


# quadratic extensions


def quad_elements(p, N):
    return st.builds(lambda a, b: QuadExtApprox.from_parts(a, b, p, N),
                     st.integers(-10**8, 10**8), st.integers(-10**8, 10**8)).filter(lambda z: not z.zero)


@settings(max_examples=60)
@given(st.data(), PRIMES)
def test_quadratic_inverse_and_conjugate(data, p):
    N = 18
    z = data.draw(quad_elements(p, N))
    w = data.draw(quad_elements(p, N))
    one = QuadExtApprox.from_parts(1, 0, p, N)
    assert z * z.inverse() == one
    assert (z * w).conj() == z.conj() * w.conj()
    n = z * z.conj()
    assert n.b % p ** n.N == 0
    assert n == QuadExtApprox.from_parts(z.norm(), 0, p, N)


@pytest.mark.parametrize("d", [2, -1, 7, 3, 15, Fraction(5, 4), -44, 45])
@pytest.mark.parametrize("p", [3, 5])
def test_sqrt_rational_squares_back(d, p):
    s = QuadExtApprox.sqrt_rational(d, p, 20)
    sq = s * s
    assert sq == QuadExtApprox.from_parts(d, 0, p, 20, s.kind, s.u)


def test_ramified_root_has_half_valuation():
    s = QuadExtApprox.sqrt_rational(3 * 7, 3, 10)
    assert s.kind == "ramified"
    assert (s * s).val == 1


def test_precision_loss_is_reported():
    with pytest.raises(PrecisionLoss):
        PadicApprox(5, 0, 0, 1)
