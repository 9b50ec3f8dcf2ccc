import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from rmc.qlattice import (ImproperIntersection, LatticeVec, QuadLattice, box_vectors, chi4, enumerate_definite,
                          enumerate_path, hermite_rows, inertia, level_enumeration, model_by_tag, order_iso,
                          short_vectors, weighted_degree)


def test_chi4_on_rationals_with_odd_denominators():
    assert [chi4(n) for n in range(8)] == [0, 1, 0, -1, 0, 1, 0, -1]
    assert chi4(Fraction(1, 3)) == chi4(3) == -1
    assert chi4(Fraction(5, 9)) == 1


def test_model_signatures():
    assert inertia(model_by_tag("sig21").lattice.gram) == (2, 1)
    assert inertia(model_by_tag("sig31-bianchi").lattice.gram) == (3, 1)
    assert inertia(model_by_tag("definite3").lattice.gram) == (3, 0)


@pytest.mark.parametrize("gram", [((2, 1), (1, 2)), ((2, 0, 0), (0, 2, 0), (0, 0, 4)), ((4, 1, 1), (1, 4, 1), (1, 1, 6))])
@pytest.mark.parametrize("bound", [1, 3, 7])
def test_short_vectors_agree_with_box_scan(gram, bound):
    lat = QuadLattice(gram, 5)
    got = sorted(c for c, _ in short_vectors(gram, bound))
    want = sorted(c for c in itertools.product(range(-6, 7), repeat=len(gram)) if any(c) and lat.q(c) <= bound)
    assert got == want


@pytest.mark.parametrize("n", [1, 2, 3, 6, 9, 14])
def test_definite_count_matches_three_squares(n):
    lat = model_by_tag("definite3").lattice
    assert len(enumerate_definite(lat, n)) == oracles.count_sum_of_squares(n, 3)


@pytest.mark.parametrize("n", [3, 6, 7, 11, 75])
def test_bianchi_weighted_degree_oracle(n):
    model = model_by_tag("sig31-bianchi", 5)
    d, j = (n, 0) if n % 5 else (n // 25, 1)
    assert weighted_degree(model, d, j) == oracles.bianchi_degree(n)


@pytest.mark.parametrize("n", [2, 5, 8, 11, 14, 17])
def test_sig21_weighted_degree_oracle(n):
    assert weighted_degree(model_by_tag("sig21", 3), n, 0) == oracles.sig21_degree(n)


def test_improper_intersection_is_detected():
    # 5 = 1 + 4 is a sum of two squares, so a vector with b = 0 has norm 5
    with pytest.raises(ImproperIntersection):
        level_enumeration(model_by_tag("sig31-bianchi", 5), 5, 0)


def test_path_enumeration_matches_box_scan():
    model = model_by_tag("sig31-bianchi", 5)
    lat = model.lattice
    found = {v.coords: s for v, s in enumerate_path(lat, 7, model.path)}
    # crossing vectors: pairings with the two endpoints have opposite signs
    want = {}
    for v in box_vectors(lat, 7, 8):
        s, t = lat.pair(v.coords, model.path.w_minus), lat.pair(v.coords, model.path.w_plus)
        if s * t < 0:
            want[v.coords] = 1 if t > 0 else -1
    assert found == want


def test_order_and_isotropy_level():
    lat = model_by_tag("sig21", 3).lattice
    v = LatticeVec.make(lat, (9, 3, 0), 0)
    assert order_iso(v, lat) == (1, 0)  # v = 3 (3, 1, 0) and q(3, 1, 0) = 1
    w = LatticeVec.make(lat, (3, 0, 1), 1)
    assert order_iso(w, lat) == (-1, 1)


@settings(max_examples=40)
@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=1, max_size=4))
def test_hermite_rows_preserve_the_row_lattice(rows):
    h = hermite_rows(rows)
    # every input row is an integer combination of the Hermite rows, and conversely
    assert hermite_rows(h + rows) == h
    assert hermite_rows(rows + h) == h
