"""End-to-end acceptance checks; each test records one PASS/FAIL line in the terminal summary."""
import random
from fractions import Fraction

import numpy as np
import pytest

import oracles
from rmc import modforms as mf
from rmc import rigidprod as rp
from rmc.msymb import (Cusp, GammaElement, GaussInt, SpecialPointData, act_point, cocycle_symbol_many,
                       eval_special, normalize_sign)
from rmc.padic import QuadExtApprox
from rmc.qlattice import level_enumeration, model_by_tag, weighted_degree
from rmc.recognize import FieldBasis, NoRelation, norm_and_splitting, recognize_algebraic

BIANCHI = rp.DivisorSpec(((3, 1), (6, -1), (7, 1)), "sig31-bianchi")
SIG21 = rp.DivisorSpec(((5, 1), (2, -2)), "sig21")


def agrees_mod(x: QuadExtApprox, y: QuadExtApprox, digits: int) -> bool:
    d = x - y
    return d.zero or d.valuation() >= digits


def unit_part(x: QuadExtApprox) -> QuadExtApprox:
    return x * Fraction(x.p) ** (-x.val)


def unit_tau(rng, p, N):
    return QuadExtApprox.from_parts(rng.randrange(p**N), p * rng.randrange(p ** (N - 1)) + 1, p, N)


def gaussian_product(factors):
    z = GaussInt(1)
    for (a, b), e in factors:
        for _ in range(e):
            z = z * GaussInt(a, b)
    return z


def gaussian_quotient(num, den):
    """(num/den) written as [re, im] over the positive integer |den|^2."""
    n, d = gaussian_product(num), gaussian_product(den)
    z = n * d.conj()
    return [z.re, z.im], d.norm()


# published values: (label, D, p, coefficients, denominator)
GAUSSIAN_VALUES = {
    "J1": ([992481, 322880], 17 * 29**2 * 73),
    "J2": ([-19245079, -2983200], 29 * 61 * 101 * 109),
    "J3": ([19229239383465, 7867810272448], 13**4 * 17**2 * 29**2 * 41 * 73),
    "J4": ([4967915642907602238905, -13926798659822783142912],
           17**3 * 29 * 41 * 73 * 109 * 149 * 193 * 197 * 233 * 241),
}
J917 = gaussian_quotient([((19, 0), 2), ((1, 1), 8), ((1, -4), 5), ((5, 2), 3), ((5, 4), 1), ((5, 6), 2)],
                         [((1, 2), 5), ((1, -2), 6), ((1, -6), 2), ((9, -4), 2), ((7, -8), 2), ((2, -13), 2)])
J37 = gaussian_quotient([((2, -1), 4), ((3, -2), 1), ((2, 5), 2), ((1, 6), 1), ((5, 8), 2), ((8, 7), 1), ((12, 7), 1)],
                        [((3, 0), 5), ((7, 0), 4), ((2, 1), 2), ((5, 6), 1), ((3, 10), 1)])
PUBLISHED = [
    *[(name, 11, 3, coeffs + [0, 0], den) for name, (coeffs, den) in GAUSSIAN_VALUES.items()],
    ("rm2", 2, 5, [-289, 480, -204, 340], 33),
    ("rm3", 3, 5, [-329, 96, 188, -56], 49),
    ("rm17", 17, 5, [8561065121, -13089950772, -2076362976, 3174779132], 3 * 5**3 * 7**2 * 17 * 23),
    ("cm17", 1, 5, [32, 60], 125),  # 4 (4 - i)^2 i / 125
    ("J917", 1, 5, *J917),
    ("J37", 1, 5, *J37),
]


def round_trip(D, p, coeffs, den, digits):
    fb = FieldBasis.make(D, p, digits)
    x = fb.element(coeffs, den)
    try:
        res = recognize_algebraic(fb.embed(x), fb, digits=digits, mode="auto")
    except NoRelation:
        return None
    return res if res.element == x else None


def test_criterion_01_generating_series(acceptance):
    g = mf.weight_three_halves_g(20)
    b = [int(g[n]) for n in (2, 5, 8, 11, 14, 17)]
    eta = mf.eta_product_g20(21)
    shown = {1: 1, 3: -2, 5: -1, 7: 2, 9: 1, 13: 2, 15: 2, 17: -6, 19: -4, 21: -4}
    eta_ok = all(eta[n] == shown.get(n, 0) for n in range(22))
    squares = [mf.four_squares_b(n) for n in (3, 6, 7)]
    ok = b == [3, 6, 3, 6, 12, 12] and eta_ok and squares == [4, 12, 8]
    acceptance(1, ok, f"b={b} eta_through_q21={eta_ok} four_squares={squares}")
    assert ok


def test_criterion_02_obstruction_kernels(acceptance):
    basis = mf.obstruction_basis("sig21", 3, 40)
    combos = {(5, 2): [1, -2], (8, 2): [1, -1], (11, 5): [1, -1], (14, 17): [1, -1]}
    found = {idx: mf.in_lattice_span(mf.obstruction_kernel(basis, idx).kernel, c) for idx, c in combos.items()}
    bianchi_basis = mf.obstruction_basis("sig31-bianchi", 5, 40)
    bianchi = mf.obstruction_kernel(bianchi_basis, (3, 6, 7))
    rejection = mf.obstruction_kernel(bianchi_basis, (3, 7))
    violations = rejection.certify([2, -1])
    values = [v for _, v in violations]
    ok = all(found.values()) and mf.in_lattice_span(bianchi.kernel, [1, -1, 1]) and -6 in values
    acceptance(2, ok, f"p=3 kernels {found}; bianchi {bianchi.kernel}; 2D3-D7 -> {rejection.describe_violation([2, -1])}")
    assert ok


def test_criterion_03_weight_zero_convergence(acceptance):
    spec = rp.PeriodFunctionSpec(BIANCHI, 5, 6)
    rng = random.Random(1)
    pt = rp.PointX.bianchi(unit_tau(rng, 5, 20), unit_tau(rng, 5, 20))
    assert rp.affinoid_level(pt) == 0
    congruences = {}
    for j in range(1, 5):
        x = rp.level_product(spec, j, pt)
        congruences[j] = x.val == 0 and agrees_mod(x, QuadExtApprox.from_parts(1, 0, 5, x.N), j)
    J = 2
    shorter = rp.eval_period(spec, pt, J=J)
    longer = rp.eval_period(spec, pt, J=J + 1)
    stable = agrees_mod(longer * shorter.inverse(), QuadExtApprox.from_parts(1, 0, 5, 20), J + 1)
    ok = all(congruences.values()) and stable
    acceptance(3, ok, f"level products = 1 mod 5^j: {congruences}; J={J} vs J+1 stable: {stable}")
    assert ok


def test_criterion_04_degree_proportionality(acceptance):
    model = model_by_tag("sig31-bianchi", 5)
    cases = [(3, 0), (6, 0), (7, 0), (11, 0), (3, 1)]
    ratios = [Fraction(weighted_degree(model, d, j), oracles.sigma1(d * 5 ** (2 * j))) for d, j in cases]
    ok = len(set(ratios)) == 1
    acceptance(4, ok, f"weighted degree / sigma = {ratios[0] if ok else ratios} on {cases}")
    assert ok


def test_criterion_05_sig21_values_at_tau11(acceptance):
    p, digits = 3, 5
    point = SpecialPointData("sig21", (2, -2, -5))
    i3 = QuadExtApprox.sqrt_rational(-1, p, 40)
    outcome = {}
    for name, divisor in (("J1", ((5, 1), (2, -2))), ("J2", ((8, 1), (2, -1)))):
        coeffs, den = GAUSSIAN_VALUES[name]
        expected = (i3 * coeffs[1] + coeffs[0]) * Fraction(1, den)
        sv = eval_special(rp.PeriodFunctionSpec(rp.DivisorSpec(divisor, "sig21"), p, digits), point)
        outcome[name] = sv.digits >= digits and agrees_mod(sv.value, normalize_sign(expected), digits)
    ok = all(outcome.values())
    acceptance(5, ok, f"agreement up to sign mod 3^5: {outcome}")
    assert ok


def test_criterion_06_bianchi_values(acceptance):
    p = 5
    spec = rp.PeriodFunctionSpec(BIANCHI, p, 4)
    v8 = eval_special(spec, SpecialPointData.from_disc("sig31-bianchi", 8, flip=True)).value
    one = agrees_mod(v8, QuadExtApprox.from_parts(1, 0, p, v8.N), 4)
    v17 = eval_special(spec, SpecialPointData.from_disc("sig31-bianchi", 17, flip=True)).value
    # the value's i is the negative of the chosen square root of -1
    i5 = -QuadExtApprox.from_parts(rp.gaussian_embedding(p, 40), 0, p, 40)
    x = (-i5 + 4) * (-i5 + 4) * i5 * Fraction(4, 125)
    candidates = {"x": x, "-x": -x, "1/x": x.inverse(), "-1/x": -x.inverse()}
    matches = [k for k, c in candidates.items() if agrees_mod(unit_part(v17), unit_part(c), 3)]
    ok = one and bool(matches)
    acceptance(6, ok, f"disc 8 = 1 mod 5^4: {one}; disc 17 valuation {v17.val}, unit part matches {matches}")
    assert ok


def random_level_two(rng, gaussian):
    if gaussian:
        gens = [GammaElement(GaussInt(1), GaussInt(2), GaussInt(0), GaussInt(1)),
                GammaElement(GaussInt(1), GaussInt(0, 2), GaussInt(0), GaussInt(1)),
                GammaElement(GaussInt(1), GaussInt(0), GaussInt(2), GaussInt(1)),
                GammaElement(GaussInt(1), GaussInt(0), GaussInt(0, 2), GaussInt(1))]
    else:
        gens = [GammaElement(1, 2, 0, 1), GammaElement(1, 0, 2, 1)]
    g = GammaElement.identity()
    for _ in range(3):
        h = rng.choice(gens)
        g = g @ (h if rng.random() < 0.5 else h.inverse())
    return g


def test_criterion_07_cocycle_law(acceptance):
    rng = random.Random(7)
    summary = {}
    for divisor, p in ((SIG21, 3), (BIANCHI, 5)):
        spec = rp.PeriodFunctionSpec(divisor, p, 3)
        gaussian = divisor.model == "sig31-bianchi"
        if gaussian:
            pts = [rp.PointX.bianchi(unit_tau(rng, p, 16), unit_tau(rng, p, 16)) for _ in range(5)]
            r, s, u = Cusp(GaussInt(0), GaussInt(1)), Cusp(GaussInt(3, 2), GaussInt(1, 4)), Cusp(GaussInt(1, 2), GaussInt(2, -4))
        else:
            pts = [rp.PointX.sig21(unit_tau(rng, p, 16)) for _ in range(5)]
            r, s, u = Cusp.of(0), Cusp.of(Fraction(3, 7)), Cusp.of(Fraction(-5, 4))
        a = cocycle_symbol_many(spec, r, s, pts)
        b = cocycle_symbol_many(spec, s, u, pts)
        c = cocycle_symbol_many(spec, r, u, pts)
        multiplicative = all(x * y == z for x, y, z in zip(a, b, c))
        equivariant = 0
        for _ in range(5):
            g = random_level_two(rng, gaussian)
            moved = cocycle_symbol_many(spec, g.act_cusp(r), g.act_cusp(s), [act_point(g, x) for x in pts])
            equivariant += moved == a
        summary[divisor.model] = (multiplicative, f"{equivariant}/5")
    ok = all(m and e == "5/5" for m, e in summary.values())
    acceptance(7, ok, f"(multiplicative, equivariant) per model: {summary}")
    assert ok


def test_criterion_08_orientation_law(acceptance):
    summary = {}
    for divisor, p, disc in ((SIG21, 3, 44), (BIANCHI, 5, 8)):
        spec = rp.PeriodFunctionSpec(divisor, p, 3)
        base = eval_special(spec, SpecialPointData.from_disc(divisor.model, disc)).value
        for n in (2, 3):
            twisted = eval_special(spec, SpecialPointData.from_disc(divisor.model, disc, orientation=n)).value
            summary[(divisor.model, n)] = twisted == normalize_sign(base**n)
    ok = all(summary.values())
    acceptance(8, ok, f"J[n x] = J[x]^n up to sign: {summary}")
    assert ok


def test_criterion_09_definite_invariance(acceptance):
    p, W = 5, 30
    spec = rp.PeriodFunctionSpec(rp.DivisorSpec(((13, 1), (2, -2)), "definite3"), p, 4)
    iota = rp.gaussian_embedding(p, W).to_int()
    neighbour = rp.p_neighbour(spec.model, (1, iota, 0), W)
    rotation = [[Fraction(3, 5), Fraction(-4, 5), 0], [Fraction(4, 5), Fraction(3, 5), 0], [0, 0, 1]]
    rng = random.Random(1)
    pts = [rp.PointX.ternary(unit_tau(rng, p, 20)) for _ in range(5)]
    base = [rp.definite_invariant_eval(spec, x) for x in pts]
    rotated = [rp.definite_invariant_eval(spec, x.translate(rotation)) for x in pts]
    moved = [rp.definite_invariant_eval(spec, x, local=neighbour) for x in pts]
    unit = QuadExtApprox.from_parts(1, 0, p, 20)
    rotation_ok = all(agrees_mod(a * b.inverse(), unit, spec.N) for a, b in zip(rotated, base))
    ratios = [a * b.inverse() for a, b in zip(moved, base)]
    neighbour_ok = all(agrees_mod(r, ratios[0], spec.N) for r in ratios)
    ok = rotation_ok and neighbour_ok
    acceptance(9, ok, f"rotation ratios all 1: {rotation_ok}; p-neighbour ratio constant: {neighbour_ok} ({ratios[0]})")
    assert ok


def test_criterion_10_weil_and_milgram(acceptance):
    worst, gauss_ok = 0.0, True
    for seed in range(10):
        D = mf.random_module(np.random.default_rng(seed))
        assert D.size <= 25
        brute = oracles.gauss_sum(D.orders, D.Q) / np.sqrt(D.size)
        sig = mf.milgram_signature(D)
        gauss_ok &= abs(brute - np.exp(2j * np.pi * sig / 8)) < 1e-10
        T, S = mf.weil_rep(D)
        eye = np.eye(D.size)
        ST = S @ T
        errors = [np.abs(S @ S.conj().T - eye).max(), np.abs(T @ T.conj().T - eye).max(),
                  np.abs(ST @ ST @ ST - S @ S).max()]
        if sig % 2 == 0:
            errors.append(np.abs(np.linalg.matrix_power(S, 4) - eye).max())
        worst = max(worst, *errors)
    ok = bool(gauss_ok and worst < 1e-10)
    acceptance(10, ok, f"max relation error {worst:.1e}; milgram matches brute Gauss sums: {bool(gauss_ok)}")
    assert ok


def test_criterion_11_u_p2_and_level_bijection(acceptance):
    p = 5
    f = mf.lattice_theta_vv([[2, 1], [1, 2]], 100)
    U = mf.u_p2(f, p)
    reindex_ok = all(c == f[(p * p * m, f.module.scale(x, p))] for (m, x), c in U.coeffs.items())
    model = model_by_tag("sig31-bianchi", p)
    bijection = {}
    for d in (3, 7):
        for j in (0, 1):
            lower = sorted(v.coords for v, _ in level_enumeration(model, p * p * d, j, primitive=False))
            raised = sorted(v.coords for v, _ in level_enumeration(model, d, j + 1, primitive=False))
            bijection[(d, j)] = lower == raised and bool(lower)
    ok = reindex_ok and all(bijection.values())
    acceptance(11, ok, f"U_p2 reindexing: {reindex_ok}; level bijection (d, j): {bijection}")
    assert ok


@pytest.mark.xfail(strict=True, reason="J917 and J37 need 120 and 80 digits of Q(i) in Q_5; see notes ledger")
def test_criterion_12_recognition_at_60_digits(acceptance):
    recovered = {name: round_trip(D, p, coeffs, den, 60) is not None for name, D, p, coeffs, den in PUBLISHED}
    ok = all(recovered.values())
    missing = [k for k, v in recovered.items() if not v]
    acceptance(12, ok, f"60-digit round trips: {sum(recovered.values())}/{len(recovered)}, not recovered: {missing}")
    assert ok


def test_recognition_of_the_large_gaussian_values_with_more_digits():
    assert round_trip(1, 5, *J37, 80) is not None
    assert round_trip(1, 5, *J917, 120) is not None


def test_splitting_reports_for_published_values():
    res = round_trip(11, 3, GAUSSIAN_VALUES["J1"][0] + [0, 0], GAUSSIAN_VALUES["J1"][1], 60)
    j1 = norm_and_splitting(res, 44)
    assert j1["norm_Q"] == "1"
    assert {f["splitting"] for f in j1["den_factors"]} == {"inert"}
    for value, digits, disc in ((J37, 80, -148), (J917, 120, -68)):
        report = norm_and_splitting(round_trip(1, 5, *value, digits), disc, "cm")
        assert {f["splitting"] for f in report["factors"]} <= {"inert", "ramified"}
    j37 = norm_and_splitting(round_trip(1, 5, *J37, 80), -148, "cm")
    assert [(f["prime"], f["exponent"]) for f in j37["factors"]] == [
        (3, -10), (5, 2), (7, -8), (13, 1), (29, 2), (37, 1), (61, -1), (89, 2), (109, -1), (113, 1), (193, 1)]
