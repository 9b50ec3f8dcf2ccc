import json
import random
import zlib
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from rmc.padic import QuadExtApprox
from rmc.recognize import (FieldBasis, NoRelation, factor_rational, fundamental_discriminant, is_lll_reduced,
                           kronecker, lll_reduce, norm_and_splitting, recognize_algebraic, report_json,
                           splitting)

J1 = ([992481, 322880], 17 * 29**2 * 73)


def det_abs(rows):
    n = len(rows)
    a = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return abs(det)


def test_lll_identity_is_fixed():
    eye = [[int(i == j) for j in range(4)] for i in range(4)]
    assert lll_reduce(eye) == eye


def test_lll_skewed_basis():
    red = lll_reduce([[1, 10**6], [0, 1]])
    assert is_lll_reduced(red)
    # Hermite bound in dimension 2: |b1|^2 <= (4/3)^(1/2) det
    assert sum(x * x for x in red[0]) <= 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_lll_on_scrambled_orthogonal_bases(seed):
    rng = random.Random(seed)
    n = 5
    diag = [rng.randint(1, 9) for _ in range(n)]
    B = [[diag[i] * (i == j) for j in range(n)] for i in range(n)]
    for _ in range(12):  # unimodular scrambling
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-3, 3)
        B[i] = [x + c * y for x, y in zip(B[i], B[j])]
    red = lll_reduce(B)
    assert is_lll_reduced(red)
    assert det_abs(red) == det_abs(B)
    lam1 = oracles.shortest_vector_norm2(B, radius=3)
    lam1 = min(lam1, min(d * d for d in diag))
    assert sum(x * x for x in red[0]) <= 2 ** (n - 1) * lam1


def test_lll_rejects_dependent_rows():
    with pytest.raises(ValueError):
        lll_reduce([[1, 2], [2, 4]])


FIELDS = [(1, 5), (1, 3), (11, 3), (2, 5), (17, 5)]


@pytest.mark.parametrize("D,p", FIELDS)
@pytest.mark.parametrize("subfield", ["Q", "Qi", "QsqrtD", "full"])
def test_round_trip_of_random_elements(D, p, subfield):
    if D == 1 and subfield in ("QsqrtD", "full"):
        pytest.skip("Q(i) has no further subfields to test")
    rng = random.Random(zlib.crc32(f"{D},{p},{subfield}".encode()))
    fb = FieldBasis.make(D, p, 60)
    mask = {"Q": (1, 0, 0, 0), "Qi": (1, 1, 0, 0), "QsqrtD": (1, 0, 1, 0), "full": (1, 1, 1, 1)}[subfield]
    done = 0
    while done < 50:
        coeffs = [rng.randint(-10**4, 10**4) * m for m in mask][: len(fb.names)]
        den = rng.randint(1, 10**4)
        if not any(coeffs) or den % p == 0:
            continue
        x = fb.element(coeffs, den)
        res = recognize_algebraic(fb.embed(x), fb, digits=60)
        assert res.element == x
        done += 1


def test_scale_consistency():
    fb = FieldBasis.make(11, 3, 60)
    x = fb.element(*J1)
    base = recognize_algebraic(fb.embed(x), fb, digits=60, mode="auto")
    c = Fraction(-2, 7)
    scaled = recognize_algebraic(fb.embed(x.scale(c)), fb, digits=60, mode="auto")
    assert scaled.element == base.element.scale(c)


def test_published_gaussian_value_in_the_biquadratic_basis():
    fb = FieldBasis.make(11, 3, 60)
    res = recognize_algebraic(fb.embed(fb.element(*J1)), fb, digits=60)
    assert res.coeffs == [992481, 322880, 0, 0] and res.den == J1[1]
    assert res.residual_margin >= 10


def test_one_is_recognized_as_one():
    for D, p in FIELDS:
        fb = FieldBasis.make(D, p, 30)
        res = recognize_algebraic(QuadExtApprox.from_parts(1, 0, p, 30), fb, digits=30)
        assert res.coeffs[0] == 1 and not any(res.coeffs[1:]) and res.den == 1


@pytest.mark.parametrize("seed", range(5))
def test_random_unit_has_no_relation(seed):
    rng = random.Random(seed)
    fb = FieldBasis.make(11, 3, 60)
    x = QuadExtApprox.from_parts(rng.randrange(3**60), rng.randrange(3**60), 3, 60)
    with pytest.raises(NoRelation):
        recognize_algebraic(x, fb, digits=60, H=1e6, mode="auto")


def test_height_bound_is_enforced():
    fb = FieldBasis.make(1, 5, 60)
    x = fb.element([12345, 678], 9871)
    with pytest.raises(NoRelation):
        recognize_algebraic(fb.embed(x), fb, digits=60, H=1000)


def test_norm_one_mode_recovers_quotients_by_conjugates():
    fb = FieldBasis.make(1, 3, 60)
    z = fb.element([123457, -98765])
    x = z * z.complex_conj().inverse()
    res = recognize_algebraic(fb.embed(x), fb, digits=60, mode="norm_one")
    assert res.element == x


# norms and splitting


@pytest.mark.parametrize("q", [2, 3, 5, 7, 11, 13, 17, 29, 37, 73])
@pytest.mark.parametrize("d", [44, -68, -148, 8, 5])
def test_kronecker_symbol(q, d):
    assert kronecker(d, q) == oracles.kronecker_prime(d, q)


def test_fundamental_discriminants():
    assert [fundamental_discriminant(d) for d in (44, 8, 17, -17, -37, 12, -4)] == [44, 8, 17, -68, -148, 12, -4]


def test_splitting_labels():
    assert splitting(11, 44) == "ramified"
    assert splitting(5, 44) == "split"
    assert splitting(17, 44) == "inert"


def test_first_published_value_report():
    fb = FieldBasis.make(1, 3, 60)
    res = recognize_algebraic(fb.embed(fb.element(*J1)), fb, digits=60)
    ns = norm_and_splitting(res, 44)
    assert ns["norm_Q"] == "1"
    assert {f["prime"]: f["splitting"] for f in ns["den_factors"]} == {17: "inert", 29: "inert", 73: "inert"}
    report = json.loads(report_json(res, 44))
    assert set(report) >= {"coeffs", "den", "field", "height", "residual_margin", "norm", "factors"}


def test_value_one_has_empty_factorization():
    fb = FieldBasis.make(1, 5, 30)
    res = recognize_algebraic(QuadExtApprox.from_parts(1, 0, 5, 30), fb, digits=30)
    ns = norm_and_splitting(res, -68)
    assert ns["norm_Q"] == "1" and ns["factors"] == []


def test_factor_rational_signs_exponents():
    assert factor_rational(Fraction(2**8 * 17, 5**11)) == [(2, 8), (5, -11), (17, 1)]
