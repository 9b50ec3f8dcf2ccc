"""p-adic Borcherds products: factors, level products and their evaluation.

A level-j factor is attached to a vector v0 primitive in the p-adic lattice
with q(v0) = m p^{2j}.  Within a level the factor <v0, xi> is divided by the
first p-adic unit coordinate of v0, so that all vectors reducing to one
isotropic line mod p^j give factors congruent mod p^j; once each line has
exponent sum zero the level product is 1 + O(p^{j-k}) on the affinoid of
level k.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from . import kernels
from .padic import PadicApprox, QuadExtApprox, hensel_sqrt, valuation
from .qlattice import (LatticeVec, Model, chi4, enumerate_definite, enumerate_path, model_by_tag,
                       order_iso)


class WeightNotZero(ArithmeticError):
    """Some isotropic line carries a nonzero exponent sum."""


class NotRegular(ArithmeticError):
    """A factor vanishes at the point to working precision."""


class NotInXp(ValueError):
    """The point is too close to a rational boundary point for the precision."""


class ZeroDenominator(ArithmeticError):
    """A normalizing pairing vanished at working precision."""


# divisors -----------------------------------------------------------------------

@dataclass(frozen=True)
class DivisorSpec:
    """Weights c_m on the norms m, for one model.

    ``pair_reduced`` keeps one vector of each pair +-v (the one with
    <v, w_plus> > 0); the weighting chi4(<v, w_plus>) sign(<v, w_plus>) is even
    in v, so the full product is the square of the reduced one up to sign.
    """

    terms: tuple
    model: str
    pair_reduced: bool = True
    certificate: object = field(default=None, compare=False)

    def __post_init__(self):
        terms = tuple((Fraction(m), int(c)) for m, c in self.terms)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def parse(cls, text: str, model: str, **kw) -> DivisorSpec:
        """From a string like "3:1,6:-1,7:1"."""
        terms = []
        for item in text.split(","):
            m, c = item.split(":")
            terms.append((Fraction(m.strip()), int(c)))
        return cls(tuple(terms), model, **kw)

    def check_prime(self, p: int):
        for m, _ in self.terms:
            if m <= 0 or m.numerator % p == 0 or m.denominator % p == 0:
                raise ValueError(f"norm {m} is not a p-adic unit for p={p}")

    def digest(self) -> str:
        text = json.dumps([self.model, self.pair_reduced, [[str(m), c] for m, c in self.terms]])
        return hashlib.sha256(text.encode()).hexdigest()[:16]


# points -----------------------------------------------------------------------

def gaussian_embedding(p: int, N: int) -> PadicApprox:
    """The image of i in Z_p (p = 1 mod 4), canonical Hensel branch."""
    if p % 4 != 1:
        raise ValueError("i embeds into Z_p only for p = 1 mod 4")
    return hensel_sqrt(-1, p, N)


@dataclass(frozen=True)
class PointX:
    """A point of X_p given by an isotropic coordinate vector over Q_{p^2}."""

    model: str
    vxi: tuple
    taus: tuple = ()

    @property
    def p(self) -> int:
        return self.vxi[0].p

    @property
    def N(self) -> int:
        return min(c.absprec for c in self.vxi)

    @staticmethod
    def _primitive(coords):
        vals = [c.val for c in coords if not c.zero]
        shift = min(vals)
        p = coords[0].p
        scale = PadicApprox(p, max(c.N for c in coords), -shift, 1)
        return tuple(c * scale for c in coords)

    @classmethod
    def sig21(cls, tau: QuadExtApprox) -> PointX:
        """tau in H_p; the isotropic vector (-1, tau, -tau^2) pairs to a tau^2 + 2b tau + c."""
        one = QuadExtApprox.from_parts(1, 0, tau.p, tau.N, tau.kind, tau.u)
        coords = (-one, tau, -(tau * tau))
        return cls("sig21", cls._primitive(coords), (tau,))

    @classmethod
    def bianchi(cls, t1: QuadExtApprox, t2: QuadExtApprox) -> PointX:
        """(t1, t2) in H_p x H_p; pairs with [x+iy; b, c] to c t1 t2 - alpha t1 - conj(alpha) t2 + b."""
        iota = gaussian_embedding(t1.p, max(t1.N, t2.N) + 2)
        half = Fraction(1, 2)
        one = QuadExtApprox.from_parts(1, 0, t1.p, t1.N, t1.kind, t1.u)
        coords = (-(t1 + t2) * half, -(t1 - t2) * iota * half, -(t1 * t2), -one)
        return cls("sig31-bianchi", cls._primitive(coords), (t1, t2))

    @classmethod
    def ternary(cls, tau: QuadExtApprox) -> PointX:
        """Conic parametrization (1 - tau^2, i(1 + tau^2), 2 tau) for x^2 + y^2 + z^2."""
        iota = gaussian_embedding(tau.p, tau.N + 2)
        t2 = tau * tau
        coords = (1 - t2, (t2 + 1) * iota, tau * 2)
        return cls("definite3", cls._primitive(coords), (tau,))

    @classmethod
    def definite(cls, coords, model: str = "definite3") -> PointX:
        return cls(model, cls._primitive(tuple(coords)))

    def functional(self, model: Model):
        """The coefficients G v_xi, so that <v, v_xi> = sum v_i g_i."""
        g = model.lattice.gram
        n = len(g)
        out = []
        for i in range(n):
            acc = None
            for k in range(n):
                if g[i][k]:
                    term = self.vxi[k] * g[i][k]
                    acc = term if acc is None else acc + term
            out.append(acc)
        return out

    def translate(self, matrix) -> PointX:
        """Apply a rational n x n matrix to v_xi (definite models)."""
        n = len(self.vxi)
        coords = []
        for i in range(n):
            acc = None
            for k in range(n):
                if matrix[i][k]:
                    term = self.vxi[k] * Fraction(matrix[i][k])
                    acc = term if acc is None else acc + term
            coords.append(acc)
        return PointX(self.model, self._primitive(tuple(coords)))


def _functional_ints(pt: PointX, model: Model, W: int):
    """Integer pairs (re, om) of G v_xi modulo p^W."""
    p = pt.p
    mod = p**W
    gre, gom = [], []
    for g in pt.functional(model):
        if g is None or g.zero:
            if g is not None and g.absprec < W:
                raise NotInXp("point coordinates known to too few digits")
            gre.append(0)
            gom.append(0)
            continue
        if g.val < 0:
            raise ValueError("functional not integral; point not primitive")
        if g.absprec < W:
            raise NotInXp(f"point known to {g.absprec} digits, need {W}")
        a, b = g.pair()
        gre.append(a * p**g.val % mod)
        gom.append(b * p**g.val % mod)
    return gre, gom


def tree_level(tau: QuadExtApprox) -> int:
    """Depth at which tau in H_p approaches P^1(Q_p): max over rationals r of ord(tau - r), or -ord tau."""
    if tau.zero:
        raise NotInXp("tau = 0 is a rational boundary point")
    if tau.kind == "unramified":
        # tau = p^val (a + b w); the distance to Q_p is p^val * b
        if tau.val < 0:
            return -tau.val + valuation(tau.b, tau.p) if tau.b % tau.p**tau.N else _raise_boundary()
        if tau.b % tau.p**tau.N == 0:
            _raise_boundary()
        return tau.val + valuation(tau.b, tau.p) if tau.b else _raise_boundary()
    raise ValueError("tree level implemented for unramified tau")


def _raise_boundary():
    raise NotInXp("point lies on P^1(Q_p) to working precision")


def affinoid_level(pt: PointX, model: Model | None = None) -> int:
    """Smallest k with ord_p <v_xi, w> <= k for every primitive isotropic w.

    Refines candidate directions w mod p^e (normalized at the first unit
    coordinate) with q(w) = 0 and <v_xi, w> = 0 mod p^e until none survive.
    """
    model = model or model_by_tag(pt.model)
    lat = model.lattice
    p = pt.p
    n = lat.rank
    limit = pt.N - 1
    if limit < 1:
        raise NotInXp("no precision")
    gre, gom = _functional_ints(pt, model, limit)
    gram = [[int(x * 2) if x.denominator != 1 else int(x) for x in row] for row in lat.gram]

    def qint(w, mod):
        # 2 q(w) or 4 q(w) scaled to integers; p odd so the factor is harmless
        return sum(w[i] * gram[i][k] * w[k] for i in range(n) for k in range(n)) % mod

    def pairing_zero(w, mod):
        a = sum(w[i] * gre[i] for i in range(n)) % mod
        b = sum(w[i] * gom[i] for i in range(n)) % mod
        return a == 0 and b == 0

    cands = []
    for w in iproduct(range(p), repeat=n):
        if not any(w):
            continue
        first = next(x for x in w if x)
        if first != 1:
            continue
        if qint(w, p) == 0 and pairing_zero(w, p):
            cands.append((w, w.index(1)))
    e = 1
    while cands:
        if e >= limit:
            raise NotInXp("refinement exhausted the working precision")
        nxt = []
        mod = p ** (e + 1)
        step = p**e
        for w, piv in cands:
            for z in iproduct(range(p), repeat=n - 1):
                z = z[:piv] + (0,) + z[piv:]
                w2 = tuple(w[i] + step * z[i] for i in range(n))
                if qint(w2, mod) == 0 and pairing_zero(w2, mod):
                    nxt.append((w2, piv))
        if not nxt:
            return e
        cands = nxt
        e += 1
    return 0


# factors ----------------------------------------------------------------------

def _pair_qext(v_coords, pt: PointX, model: Model, scale: Fraction = Fraction(1)):
    acc = None
    for vi, g in zip(v_coords, pt.functional(model)):
        if vi and g is not None:
            term = g * (Fraction(vi) * scale)
            acc = term if acc is None else acc + term
    if acc is None:
        raise NotRegular("factor vanishes identically")
    return acc


def isotropic_lift(v0, model: Model, d: int, W: int):
    """Canonical isotropic Hensel lift of v0 mod p^d, computed mod p^W.

    At each step the correction z mod p solving <w, z> = -q(w)/p^e is the
    lexicographically smallest one.
    """
    lat = model.lattice
    p = lat.p
    n = lat.rank
    if d < 1:
        raise ValueError("lift needs isotropy level >= 1")
    w = [int(x) % p**W for x in v0]
    e = d
    while e < W:
        qw = lat.q(w)
        qw = qw.numerator * pow(qw.denominator, -1, p ** (W + 1)) % p ** (W + 1)
        if qw % p ** (e + 1) == 0:
            e += 1
            continue
        target = (-(qw // p**e)) % p
        gw = [int(sum(lat.gram[i][k] * w[k] for k in range(n))) % p for i in range(n)]
        best = None
        for z in iproduct(range(p), repeat=n):
            if sum(gw[i] * z[i] for i in range(n)) % p == target:
                best = z
                break
        if best is None:
            raise ValueError("vector is not primitive at p")
        w = [(w[i] + p**e * best[i]) % p**W for i in range(n)]
        e += 1
    return tuple(w)


def factor_value(v: LatticeVec, pt: PointX, normalized: bool = False, model: Model | None = None):
    """<v0, v_xi> for the primitive representative v0 of v; optionally divided by <v~, v_xi>."""
    model = model or model_by_tag(pt.model)
    p = pt.p
    k = min(valuation(c, p) for c in v.coords if c)
    v0 = tuple(c // p**k for c in v.coords)
    raw = _pair_qext(v0, pt, model)
    if not normalized:
        return raw
    _, iso = order_iso(LatticeVec.make(model.lattice, v0), model.lattice)
    if iso == 0:
        return raw
    d = iso if iso != float("inf") else pt.N
    W = pt.N - 1
    lift = isotropic_lift(v0, model, min(d, W - 1), W)
    den = _pair_qext(lift, pt, model)
    if den.zero:
        raise ZeroDenominator("normalizing pairing vanished")
    return raw / den


# local lattices -------------------------------------------------------------

@dataclass(frozen=True)
class LocalLattice:
    """A self-dual Z_p-lattice given by coordinate functionals.

    The i-th coordinate of v is p^shift[i] * sum_k F[i][k] v_k, with F known
    modulo p^W.  ``max_den`` bounds the p-power denominators of the lattice
    relative to Z^n.
    """

    F: tuple
    shift: tuple
    max_den: int
    W: int
    name: str = "standard"

    @classmethod
    def standard(cls, n: int, W: int = 40) -> LocalLattice:
        return cls(tuple(tuple(int(i == k) for k in range(n)) for i in range(n)), (0,) * n, 0, W)

    def coordinates(self, V: np.ndarray, S: int, p: int):
        """Coordinates of the rows V / p^S as (C mod p^W, order per row)."""
        mod = p**self.W
        n = len(self.F)
        cols = []
        for i in range(n):
            acc = np.zeros(len(V), dtype=object)
            for k in range(n):
                if self.F[i][k]:
                    acc = acc + V[:, k].astype(object) * self.F[i][k]
            cols.append(acc % mod)
        vals = []
        for i in range(n):
            col = cols[i]
            v = np.full(len(V), self.W, dtype=np.int64)
            for r, x in enumerate(col):
                if x:
                    v[r] = valuation(int(x), p)
            vals.append(v + self.shift[i])
        order = np.min(np.stack(vals, axis=1), axis=1) - S
        return np.stack(cols, axis=1), order, vals


def p_neighbour(model: Model, w, W: int = 30) -> LocalLattice:
    """The lattice (1/p) Z_p w + {u in Lambda : <u, w> = 0 mod p} for isotropic w.

    ``w`` is a tuple of p-adic integers (ints mod p^W) with q(w) = 0 mod p^W.
    Basis: w/p, p w*, and a basis of the orthogonal complement of {w, w*},
    where w* is an isotropic partner with <w, w*> = 1.
    """
    lat = model.lattice
    p = lat.p
    n = lat.rank
    mod = p**W
    G = [[int(x) for x in row] for row in lat.gram]

    def pair(a, b):
        return sum(a[i] * G[i][k] * b[k] for i in range(n) for k in range(n)) % mod

    def qf(a):
        return pair(a, a) * pow(2, -1, mod) % mod

    w = [x % mod for x in w]
    if qf(w) % mod:
        raise ValueError("w is not isotropic to the working precision")
    e = next(tuple(int(i == k) for k in range(n)) for i in range(n) if pair(w, [int(i == k) for k in range(n)]) % p)
    s = pow(pair(w, e), -1, mod)
    e1 = [x * s % mod for x in e]
    ws = [(e1[i] - qf(e1) * w[i]) % mod for i in range(n)]
    comp = []
    for i in range(n):
        x = [int(i == k) for k in range(n)]
        y = [(x[c] - pair(x, ws) * w[c] - pair(x, w) * ws[c]) % mod for c in range(n)]
        trial = comp + [y]
        if _rank_mod_p(trial, p) == len(trial):
            comp = trial
        if len(comp) == n - 2:
            break
    # coordinates: c_w = p <v, w*>, c_ws = <v, w> / p, complement via inverse Gram
    H = [[pair(a, b) for b in comp] for a in comp]
    Hinv = _inverse_mod(H, p, W)
    F = [[_dot_gram(G, ws, k, mod) for k in range(n)], [_dot_gram(G, w, k, mod) for k in range(n)]]
    for i in range(len(comp)):
        row = [0] * n
        for jj in range(len(comp)):
            for k in range(n):
                row[k] = (row[k] + Hinv[i][jj] * _dot_gram(G, comp[jj], k, mod)) % mod
        F.append(row)
    shift = (1, -1) + (0,) * (n - 2)
    return LocalLattice(tuple(tuple(r) for r in F), shift, 1, W, "p-neighbour")


def _dot_gram(G, a, k, mod):
    return sum(a[i] * G[i][k] for i in range(len(a))) % mod


def _rank_mod_p(rows, p):
    a = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(a[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], -1, p)
        for i in range(len(a)):
            if i != rank and a[i][c]:
                f = a[i][c] * inv % p
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def _inverse_mod(H, p, W):
    n = len(H)
    mod = p**W
    a = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(H)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] % p)
        a[c], a[piv] = a[piv], a[c]
        inv = pow(a[c][c], -1, mod)
        a[c] = [x * inv % mod for x in a[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % mod for x, y in zip(a[i], a[c])]
    return [r[n:] for r in a]


# level sets ---------------------------------------------------------------------

FAST_MODELS = ("sig21", "sig31-bianchi")


def _hyperbolic_chunks(spec: DivisorSpec, model: Model, j: int, fast: bool):
    """Yield (V, e) for the level-j set of the hyperbolic divisor."""
    p = model.lattice.p
    twist = chi4(p) ** j
    for m, c in spec.terms:
        if c == 0:
            continue
        N = m * p ** (2 * j)
        if N.denominator != 1:
            raise ValueError("norms must be integral")
        N = int(N)
        if fast and spec.pair_reduced and model.tag in FAST_MODELS:
            for V, t in kernels.hyperbolic_level_chunks(model.tag, N, p, primitive=j > 0):
                e = c * twist * kernels.chi4_array(t)
                keep = e != 0
                yield V[keep], e[keep]
            continue
        rows, es = [], []
        for v, sgn in enumerate_path(model.lattice, N, model.path):
            if j > 0 and all(x % p == 0 for x in v.coords):
                continue
            t = model.lattice.pair(v.coords, model.path.w_plus)
            if spec.pair_reduced and t < 0:
                continue
            wgt = model.weight(LatticeVec(v.coords, j, m), sgn)
            if wgt:
                rows.append(v.coords)
                es.append(c * wgt)
        if rows:
            yield np.array(rows, dtype=np.int64), np.array(es, dtype=np.int64)


def _definite_vectors(model: Model, N: int):
    if model.tag == "definite3" and model.lattice.gram == tuple(tuple(Fraction(2 * (i == k)) for k in range(3)) for i in range(3)):
        return kernels.sum_of_squares_vectors(3, N)
    vecs = enumerate_definite(model.lattice, N)
    return np.array([v.coords for v in vecs], dtype=np.int64).reshape(-1, model.lattice.rank)


# products ---------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodFunctionSpec:
    divisor: DivisorSpec
    p: int
    N: int
    J: int | None = None
    fast: bool = True

    @property
    def model(self) -> Model:
        return model_by_tag(self.divisor.model, self.p)


@dataclass
class _Acc:
    num: tuple = (1, 0)
    lam: int = 1
    val: int = 0


def _accumulate(accs, V, C, e, pts_int, p, M, W, w_sq, lam_vals, slack, shift):
    mod_m = p**M
    mod_w = p**W
    for acc, (gre, gom) in zip(accs, pts_int):
        A, B = kernels.linear_form(V, gre, gom, mod_w)
        A, B, v, over = kernels.strip_valuation(A, B, p, slack)
        if over.any():
            bad = V[np.argmax(over)]
            raise NotRegular(f"factor of vector {tuple(int(x) for x in bad)} vanishes to {slack} digits")
        acc.val += int(np.sum((v - shift) * e))
        A = np.mod(A, mod_m)
        B = np.mod(B, mod_m)
        acc.num = kernels.mul_pair(acc.num, kernels.weighted_product(A, B, e, mod_m, w_sq), mod_m, w_sq)
    lam_prod = kernels.weighted_real_product(np.mod(lam_vals, mod_m), e, mod_m)
    for acc in accs:
        acc.lam = acc.lam * lam_prod % mod_m


def level_products(spec: PeriodFunctionSpec, j: int, pts, local: LocalLattice | None = None,
                   check: bool = True, M: int | None = None, slack: int | None = None):
    """Level-j products at several points; raises WeightNotZero on a bad line."""
    model = spec.model
    p = spec.p
    if not pts:
        return []
    levels = [affinoid_level(pt, model) for pt in pts]
    k = max(levels)
    M = spec.N + 2 if M is None else M
    slack = k + 6 if slack is None else slack
    W = M + slack
    pts_int = [_functional_ints(pt, model, W) for pt in pts]
    q0 = pts[0].vxi[0]
    w_sq = q0.omega_square
    accs = [_Acc() for _ in pts]
    tally = kernels.LineTally()
    if model.path is not None:
        chunks = _hyperbolic_chunks(spec.divisor, model, j, spec.fast)
        for V, e in chunks:
            if len(V) == 0:
                continue
            _, lam = kernels.first_unit(V, p)
            if j > 0 and check:
                tally.add(kernels.line_keys(V, lam, p, j), e)
            _accumulate(accs, V, V, e, pts_int, p, M, W, w_sq, lam, slack, 0)
    else:
        local = local or LocalLattice.standard(model.lattice.rank)
        for V, C, e, shift in _definite_level(spec.divisor, model, j, local):
            _, lam = kernels.first_unit(C, p)
            if j > 0 and check:
                tally.add(kernels.line_keys(C, lam, p, j), e)
            _accumulate(accs, V, C, e, pts_int, p, M, W, w_sq, lam.astype(object), slack, shift)
    if j > 0 and check:
        bad, worst = tally.nonzero()
        if bad:
            raise WeightNotZero(f"level {j}: {bad} isotropic lines with nonzero exponent sum (max |sum| {worst})")
    mod = p**M
    out = []
    for acc, pt in zip(accs, pts):
        unit = kernels.mul_pair(acc.num, (pow(acc.lam, -1, mod), 0), mod, w_sq)
        out.append(QuadExtApprox.from_unit_pair(unit[0], unit[1], acc.val, p, M, q0.kind, q0.u))
    return out


def _definite_level(divisor: DivisorSpec, model: Model, j: int, local: LocalLattice):
    """Yield (V, C, e, shift): vectors w with v = w / p^S of order -j in the local lattice.

    C are the local coordinates of v0 = p^j v and shift = S - j is the
    p-power relating <w, xi> to <v0, xi>.
    """
    p = model.lattice.p
    S = j + local.max_den
    for m, c in divisor.terms:
        if c == 0:
            continue
        N = m * p ** (2 * S)
        if N.denominator != 1:
            raise ValueError("norms must be integral")
        V = _definite_vectors(model, int(N))
        if len(V) == 0:
            continue
        C, order, vals = local.coordinates(V, S, p)
        keep = order == -j
        if not keep.any():
            continue
        V, C = V[keep], C[keep]
        # rescale coordinates to those of v0 = p^j v (all of order 0)
        shift_cols = []
        mod = p**local.W
        for i in range(C.shape[1]):
            s = local.shift[i] - S + j
            col = C[:, i]
            if s >= 0:
                shift_cols.append((col * p**s) % mod)
            else:
                shift_cols.append(np.array([int(x) // p ** (-s) for x in col], dtype=object))
        C0 = np.stack(shift_cols, axis=1)
        e = np.full(len(V), c, dtype=np.int64)
        yield V, C0, e, S - j


def level_product(spec: PeriodFunctionSpec, j: int, pt: PointX, **kw) -> QuadExtApprox:
    return level_products(spec, j, [pt], **kw)[0]


def default_levels(spec: PeriodFunctionSpec, k: int) -> int:
    """Smallest truncation J whose tail is 1 mod p^N on the level-k affinoid."""
    return spec.J if spec.J is not None else spec.N + k - 1


def eval_period_many(spec: PeriodFunctionSpec, pts, local: LocalLattice | None = None, J: int | None = None):
    """Products over levels 0..J at each point, with guaranteed digits min(N, J + 1 - k)."""
    model = spec.model
    if not pts:
        return []
    k = max(affinoid_level(pt, model) for pt in pts)
    J = default_levels(spec, k) if J is None else J
    vals = None
    for j in range(J + 1):
        lv = level_products(spec, j, pts, local=local)
        vals = lv if vals is None else [a * b for a, b in zip(vals, lv)]
    digits = max(1, min(spec.N, J + 1 - k))
    return [_truncate(v, digits) for v in vals]


def _truncate(x: QuadExtApprox, digits: int) -> QuadExtApprox:
    if x.zero or x.N <= digits:
        return x
    mod = x.p**digits
    return QuadExtApprox(x.p, digits, x.kind, x.u, x.val, x.a % mod, x.b % mod)


def eval_period(spec: PeriodFunctionSpec, pt: PointX, **kw) -> QuadExtApprox:
    return eval_period_many(spec, [pt], **kw)[0]


def definite_invariant_eval(spec: PeriodFunctionSpec, pt: PointX, local: LocalLattice | None = None, J=None):
    """The definite invariant function at pt, up to one global unit per lattice."""
    if spec.model.path is not None:
        raise ValueError("definite evaluation needs a definite model")
    return eval_period(spec, pt, local=local, J=J)


# optional cache ---------------------------------------------------------------

CACHE_VERSION = 1


def save_cache(path, spec: PeriodFunctionSpec, J: int, cells: dict):
    """Write evaluated values: header JSON line, then little-endian limbs per cell.

    ``cells`` maps a string label to a QuadExtApprox.
    """
    header = {"format_version": CACHE_VERSION, "p": spec.p, "N": spec.N, "model": spec.divisor.model,
              "divisor": spec.divisor.digest(), "J": J, "cells": sorted(cells),
              "fields": {label: [cells[label].kind, cells[label].u] for label in cells}}
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        for label in sorted(cells):
            x = cells[label]
            fh.write(struct.pack("<qqq", x.val, x.N, int(x.zero)))
            for comp in (x.a, x.b):
                fh.write(_limbs(comp, spec.p**spec.N))


def _limbs(x: int, mod: int) -> bytes:
    nbytes = (mod.bit_length() + 7) // 8
    return struct.pack("<I", nbytes) + int(x).to_bytes(nbytes, "little")


def load_cache(path, spec: PeriodFunctionSpec):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        if header["format_version"] != CACHE_VERSION or header["divisor"] != spec.divisor.digest():
            raise ValueError("cache does not match the divisor specification")
        cells = {}
        for label in header["cells"]:
            kind, u = header["fields"][label]
            val, N, zero = struct.unpack("<qqq", fh.read(24))
            comps = []
            for _ in range(2):
                (nbytes,) = struct.unpack("<I", fh.read(4))
                comps.append(int.from_bytes(fh.read(nbytes), "little"))
            cells[label] = QuadExtApprox(spec.p, N, kind, u, val, comps[0], comps[1], bool(zero))
        return header, cells
