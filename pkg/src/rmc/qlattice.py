"""Rational quadratic lattices, exact vector enumeration and the concrete models.

Gram matrices hold the bilinear form <v, w> with <v, v> = 2 q(v).  Vectors
are integer coordinate tuples over a p-power denominator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .padic import valuation


class ImproperIntersection(ValueError):
    """A vector of the requested norm pairs to zero with a path endpoint."""


def chi4(n) -> int:
    """The odd character of conductor 4, extended to Z[1/p] for odd p."""
    n = Fraction(n)
    num = n.numerator * n.denominator  # denominators are odd, chi4(d) = chi4(1/d)
    return (0, 1, 0, -1)[num % 4]


def sign(x) -> int:
    return (x > 0) - (x < 0)


def _ldl(gram):
    """Exact LDL^T of a symmetric rational matrix (no pivoting).

    Returns (d, mu) with q(x) = sum_i d[i] * (x_i + sum_{j>i} mu[i][j] x_j)^2
    where q(x) = x^T G x / 2.  Returns None if a zero pivot occurs.
    """
    n = len(gram)
    a = [[Fraction(gram[i][j], 2) for j in range(n)] for i in range(n)]
    d = [Fraction(0)] * n
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        if a[i][i] == 0:
            return None
        d[i] = a[i][i]
        for j in range(i + 1, n):
            mu[i][j] = a[i][j] / d[i]
        for j in range(i + 1, n):
            for k in range(i + 1, n):
                a[j][k] -= d[i] * mu[i][j] * mu[i][k]
    return d, mu


def inertia(gram) -> tuple[int, int]:
    """Signature (r, s) of a nondegenerate symmetric rational matrix (Sylvester)."""
    a = [[Fraction(x) for x in row] for row in gram]
    pos = neg = 0
    while a:
        n = len(a)
        i = next((k for k in range(n) if a[k][k] != 0), None)
        if i is None:
            off = next(((k, l) for k in range(n) for l in range(n) if a[k][l] != 0), None)
            if off is None:
                break
            k, l = off
            # congruence e_k -> e_k + e_l makes the diagonal entry 2 a_kl nonzero
            for c in range(n):
                a[k][c] += a[l][c]
            for r in range(n):
                a[r][k] += a[r][l]
            continue
        piv = a[i][i]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        rest = [r for r in range(n) if r != i]
        a = [[a[r][c] - a[r][i] * a[i][c] / piv for c in rest] for r in rest]
    return pos, neg


@dataclass(frozen=True)
class QuadLattice:
    """The lattice Z^n in a rational quadratic space, viewed at a prime p."""

    gram: tuple
    p: int
    labels: tuple = ()
    name: str = ""
    signature: tuple = field(default=(), compare=False)

    def __post_init__(self):
        g = tuple(tuple(Fraction(x) for x in row) for row in self.gram)
        n = len(g)
        if any(len(row) != n for row in g) or any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("Gram matrix must be square and symmetric")
        object.__setattr__(self, "gram", g)
        det = _det(g)
        if det == 0:
            raise ValueError("degenerate Gram matrix")
        if det.numerator % self.p == 0 or det.denominator % self.p == 0:
            raise ValueError(f"Gram determinant {det} is not a unit at p={self.p}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i}" for i in range(n)))
        if not self.signature:
            object.__setattr__(self, "signature", inertia(g))

    @property
    def rank(self) -> int:
        return len(self.gram)

    def pair(self, v, w) -> Fraction:
        g = self.gram
        n = len(g)
        return sum(Fraction(v[i]) * g[i][j] * w[j] for i in range(n) for j in range(n) if g[i][j])

    def q(self, v) -> Fraction:
        return self.pair(v, v) / 2

    def is_definite(self) -> bool:
        return self.signature[1] == 0


def _det(g) -> Fraction:
    n = len(g)
    a = [list(row) for row in g]
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if a[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            det = -det
        det *= a[i][i]
        for r in range(i + 1, n):
            f = a[r][i] / a[i][i]
            if f:
                for c in range(i, n):
                    a[r][c] -= f * a[i][c]
    return det


@dataclass(frozen=True, order=True)
class LatticeVec:
    """The vector coords / p**den_exp together with its norm q."""

    coords: tuple
    den_exp: int = 0
    norm: Fraction = field(default=Fraction(0), compare=False)

    @classmethod
    def make(cls, lat: QuadLattice, coords, den_exp: int = 0) -> LatticeVec:
        coords = tuple(int(c) for c in coords)
        return cls(coords, den_exp, lat.q(coords) / Fraction(lat.p) ** (2 * den_exp))

    def rational(self, p: int) -> tuple:
        return tuple(Fraction(c, p**self.den_exp) for c in self.coords)

    def scaled(self, lat: QuadLattice, k: int) -> LatticeVec:
        """p**k * self, kept in lowest terms."""
        return _reduced(lat, self.coords, self.den_exp - k)

    def __neg__(self):
        return LatticeVec(tuple(-c for c in self.coords), self.den_exp, self.norm)


def _reduced(lat, coords, den_exp):
    p = lat.p
    coords = list(coords)
    while den_exp > 0 and all(c % p == 0 for c in coords):
        coords = [c // p for c in coords]
        den_exp -= 1
    if den_exp < 0:
        coords = [c * p ** (-den_exp) for c in coords]
        den_exp = 0
    return LatticeVec.make(lat, coords, den_exp)


def order_iso(v: LatticeVec, lat: QuadLattice):
    """(ord, iso): v = p**ord * v0 with v0 primitive, iso = ord_p q(v0)."""
    p = lat.p
    if not any(v.coords):
        raise ValueError("order of the zero vector")
    k = min(valuation(c, p) for c in v.coords if c)
    v0 = [c // p**k for c in v.coords]
    qv0 = lat.q(v0)
    iso = math.inf if qv0 == 0 else valuation(qv0.numerator, p) - valuation(qv0.denominator, p)
    return k - v.den_exp, iso


def _isqrt_floor(x: Fraction) -> int:
    """floor(sqrt(x)) for x >= 0."""
    n = math.isqrt(x.numerator // x.denominator)
    while Fraction((n + 1) ** 2) <= x:
        n += 1
    return n


def short_vectors(gram, bound, exact: bool = False):
    """All integer x with q(x) <= bound (or == bound if ``exact``), q = x^T G x / 2.

    Fincke-Pohst enumeration over an exact LDL^T decomposition; the zero
    vector is excluded.  Returns a list of (coords, q).
    """
    bound = Fraction(bound)
    dec = _ldl(gram)
    if dec is None or any(d <= 0 for d in dec[0]):
        raise ValueError("Gram matrix is not positive definite")
    d, mu = dec
    n = len(gram)
    out = []
    x = [0] * n

    def rec(i, remaining):
        if i < 0:
            if any(x):
                val = bound - remaining
                if not exact or remaining == 0:
                    out.append((tuple(x), val))
            return
        center = -sum(mu[i][j] * x[j] for j in range(i + 1, n))
        r = _isqrt_floor(remaining / d[i]) + 1
        lo = math.floor(center) - r
        hi = math.ceil(center) + r
        for xi in range(lo, hi + 1):
            t = d[i] * (xi - center) ** 2
            if t <= remaining:
                x[i] = xi
                rec(i - 1, remaining - t)
        x[i] = 0

    rec(n - 1, bound)
    return out


def enumerate_definite(lat: QuadLattice, m) -> list[LatticeVec]:
    """All lattice vectors of norm m, in lexicographic coordinate order."""
    if not lat.is_definite():
        raise ValueError("lattice is not positive definite")
    m = Fraction(m)
    if m <= 0:
        raise ValueError("norm must be positive")
    vecs = [LatticeVec(c, 0, m) for c, _ in short_vectors(lat.gram, m, exact=True)]
    return sorted(vecs)


@dataclass(frozen=True)
class PathConstraint:
    """A geodesic between the isotropic lines of w_minus (source) and w_plus (target)."""

    w_minus: tuple
    w_plus: tuple

    def check(self, lat: QuadLattice) -> Fraction:
        if lat.q(self.w_minus) != 0 or lat.q(self.w_plus) != 0:
            raise ValueError("path endpoints must be isotropic")
        b = lat.pair(self.w_minus, self.w_plus)
        if b >= 0:
            raise ValueError("path endpoints must pair negatively")
        return b


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    for t in range(1, math.isqrt(n) + 1):
        if n % t == 0:
            small.append(t)
            if t * t != n:
                large.append(n // t)
    return small + large[::-1]


def _integer_row_basis(rows):
    """Z-basis (as rational vectors) of the Z-span of rational row vectors."""
    den = 1
    for r in rows:
        for x in r:
            den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    mat = [[int(Fraction(x) * den) for x in r] for r in rows]
    basis = hermite_rows(mat)
    return [[Fraction(x, den) for x in r] for r in basis]


def hermite_rows(mat):
    """Row-style Hermite normal form of an integer matrix; zero rows dropped."""
    a = [list(r) for r in mat]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    r = 0
    for c in range(ncols):
        # bring gcd of column c (rows r..) into row r
        while True:
            nz = [i for i in range(r, nrows) if a[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[piv] = a[piv], a[r]
            done = True
            for i in range(r + 1, nrows):
                if a[i][c]:
                    f = a[i][c] // a[r][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if r < nrows and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                f = a[i][c] // a[r][c]
                if f:
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            r += 1
        if r == nrows:
            break
    return [row for row in a if any(row)]


def enumerate_path(lat: QuadLattice, m, path: PathConstraint, improper_ok: bool = False):
    """Vectors v with q(v) = m whose divisor crosses the path, with intersection signs.

    Uses the orthogonal split v = v_par + v_perp along the plane U spanned by
    the path endpoints: q(v_perp) < m bounds a definite enumeration, and for
    each v_perp the pairs (s, t) = (<v, w_minus>, <v, w_plus>) satisfy
    s * t = (m - q(v_perp)) * <w_minus, w_plus>.  The sign is sign(t).
    """
    m = Fraction(m)
    if m <= 0:
        raise ValueError("norm must be positive")
    wm, wp = path.w_minus, path.w_plus
    bpair = path.check(lat)
    n = lat.rank
    basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]

    def proj(v):
        alpha = lat.pair(v, wp) / bpair
        beta = lat.pair(v, wm) / bpair
        return [Fraction(v[i]) - alpha * wm[i] - beta * wp[i] for i in range(n)]

    pbasis = _integer_row_basis([proj(e) for e in basis])
    k = len(pbasis)
    pgram = [[lat.pair(pbasis[i], pbasis[j]) for j in range(k)] for i in range(k)]
    perp = [((0,) * k, Fraction(0))] + short_vectors(pgram, m)
    out = []
    for coeff, qperp in perp:
        vperp = [sum(coeff[i] * pbasis[i][c] for i in range(k)) for c in range(n)]
        c0 = (m - qperp) * bpair
        if qperp == m:
            if not improper_ok and _has_axis_point(vperp, wm, wp, bpair):
                raise ImproperIntersection(f"norm {m} admits vectors meeting the path improperly")
            continue
        if qperp > m or c0.denominator != 1:
            continue
        c0 = int(c0)
        for s_abs in _divisors(c0):
            for s in (s_abs, -s_abs):
                t = c0 // s
                v = [vperp[i] + (t * wm[i] + s * wp[i]) / bpair for i in range(n)]
                if all(x.denominator == 1 for x in v):
                    out.append((LatticeVec(tuple(int(x) for x in v), 0, m), sign(t)))
    out.sort()
    return out


def _has_axis_point(vperp, wm, wp, bpair) -> bool:
    # does vperp + (t*wm + s*wp)/bpair lie in Z^n for some integers with s*t = 0?
    dens = [Fraction(x).denominator for x in list(vperp) + [Fraction(y) / bpair for y in list(wm) + list(wp)]]
    period = math.lcm(*dens)
    n = len(vperp)
    for t in range(period):
        for s, tt in ((0, t), (t, 0)):
            v = [vperp[i] + (tt * wm[i] + s * wp[i]) / bpair for i in range(n)]
            if all(Fraction(x).denominator == 1 for x in v):
                return True
    return False


@dataclass(frozen=True)
class Model:
    """A concrete lattice model: lattice, standard path and character rule.

    ``weight_coord`` is the coordinate fed to chi4; for the hyperbolic
    models it equals <v, w_plus>.
    """

    tag: str
    lattice: QuadLattice
    path: PathConstraint | None
    weight_coord: int | None

    def weight(self, v: LatticeVec, sgn: int = 1) -> int:
        if self.weight_coord is None:
            return sgn
        return chi4(Fraction(v.coords[self.weight_coord], self.lattice.p**v.den_exp)) * sgn


def sig21_model(p: int = 3) -> Model:
    """Trace-zero matrices [[-b, -c], [a, b]] with q = b^2 - ac; coordinates (a, b, c)."""
    lat = QuadLattice(((0, 0, -1), (0, 2, 0), (-1, 0, 0)), p, ("a", "b", "c"), "sig21")
    return Model("sig21", lat, PathConstraint((-1, 0, 0), (0, 0, -1)), 0)


def bianchi_model(p: int = 5) -> Model:
    """[alpha; b, c] with alpha = x + iy and q = x^2 + y^2 - bc; coordinates (x, y, b, c)."""
    gram = ((2, 0, 0, 0), (0, 2, 0, 0), (0, 0, 0, -1), (0, 0, -1, 0))
    lat = QuadLattice(gram, p, ("x", "y", "b", "c"), "sig31-bianchi")
    return Model("sig31-bianchi", lat, PathConstraint((0, 0, 0, -1), (0, 0, -1, 0)), 3)


def sum_of_squares_lattice(n: int, p: int) -> QuadLattice:
    gram = tuple(tuple(2 * (i == j) for j in range(n)) for i in range(n))
    return QuadLattice(gram, p, tuple("xyzw"[:n]) if n <= 4 else (), f"Z^{n}")


def definite3_model(p: int = 5) -> Model:
    return Model("definite3", sum_of_squares_lattice(3, p), None, None)


MODELS = {"sig21": sig21_model, "sig31-bianchi": bianchi_model, "definite3": definite3_model}


def model_by_tag(tag: str, p: int | None = None) -> Model:
    try:
        ctor = MODELS[tag]
    except KeyError:
        raise ValueError(f"unknown model {tag!r}") from None
    return ctor() if p is None else ctor(p)


def level_enumeration(model: Model, d, j: int, primitive: bool = True):
    """The level-j vectors of norm d: w in Z^n with q(w) = d p^{2j}, primitive at p for j > 0.

    Returned as (LatticeVec with den_exp j, intersection sign) pairs, so that
    the represented rational vector has norm d.
    """
    lat = model.lattice
    p = lat.p
    N = Fraction(d) * p ** (2 * j)
    out = []
    for v, sgn in enumerate_path(lat, N, model.path):
        if primitive and j > 0 and all(c % p == 0 for c in v.coords):
            continue
        out.append((LatticeVec(v.coords, j, Fraction(d)), sgn))
    return out


def weighted_degree(model: Model, d, j: int) -> int:
    """Sum of chi4-weighted intersection signs over all vectors of norm d p^{2j}."""
    return sum(model.weight(v, s) for v, s in level_enumeration(model, d, j, primitive=False))


def box_vectors(lat: QuadLattice, m, radius: int):
    """Brute force: all integer vectors in the box |x_i| <= radius of norm m."""
    m = Fraction(m)
    return sorted(LatticeVec(c, 0, m) for c in product(range(-radius, radius + 1), repeat=lat.rank)
                  if any(c) and lat.q(c) == m)
