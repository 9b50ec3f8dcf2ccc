"""Recognizing p-adic numbers as elements of Q(i, sqrt D) by lattice reduction."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .padic import QuadExtApprox


class NoRelation(ArithmeticError):
    """No relation of acceptable height was found at the given precision."""


# LLL ----------------------------------------------------------------------------

def lll_reduce(basis, delta: Fraction = Fraction(3, 4)):
    """Integral LLL (exact arithmetic) on the rows of ``basis``; rows must be independent."""
    b = [list(map(int, r)) for r in basis]
    n = len(b)
    if n == 0:
        return []

    def dot(x, y):
        return sum(a * c for a, c in zip(x, y))

    # integral Gram-Schmidt data: d[i] and lam[i][j]
    d = [1] * (n + 1)
    lam = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            u = dot(b[i], b[j])
            for k in range(j):
                u = (d[k + 1] * u - lam[i][k] * lam[j][k]) // d[k]
            if j < i:
                lam[i][j] = u
            else:
                if u == 0:
                    raise ValueError("basis vectors are linearly dependent")
                d[i + 1] = u

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lmb = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lmb * lmb) // d[k]
        for i in range(k + 1, n):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lmb * t) // d[k]
            lam[i][k - 1] = (B * t + lmb * lam[i][k]) // d[k + 1]
        d[k] = B

    k = 1
    num, den = delta.numerator, delta.denominator
    while k < n:
        red(k, k - 1)
        # Lovasz: d_{k+1} d_{k-1} >= (delta d_k^2 - lam^2)
        if den * d[k + 1] * d[k - 1] < num * d[k] * d[k] - den * lam[k][k - 1] ** 2:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b


def gram_schmidt(basis):
    """Rational Gram-Schmidt vectors and coefficients (for checks)."""
    bs, mu = [], []
    for i, v in enumerate(basis):
        v = [Fraction(x) for x in v]
        row = []
        w = v[:]
        for j in range(i):
            bj = bs[j]
            nj = sum(x * x for x in bj)
            m = sum(Fraction(a) * c for a, c in zip(basis[i], bj)) / nj
            row.append(m)
            w = [x - m * y for x, y in zip(w, bj)]
        bs.append(w)
        mu.append(row)
    return bs, mu


def is_lll_reduced(basis, delta=Fraction(3, 4)) -> bool:
    bs, mu = gram_schmidt(basis)
    norms = [sum(x * x for x in v) for v in bs]
    for i in range(len(basis)):
        if any(abs(m) > Fraction(1, 2) for m in mu[i]):
            return False
        if i and norms[i] < (delta - mu[i][i - 1] ** 2) * norms[i - 1]:
            return False
    return True


# fields -------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldElement:
    """a + b i + c s + d i s with s^2 = D, exact rationals."""

    D: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(x) for x in self.coeffs))

    def __mul__(self, o: FieldElement) -> FieldElement:
        a, b, c, d = self.coeffs
        e, f, g, h = o.coeffs
        D = self.D
        # basis products: i^2 = -1, s^2 = D, (is)^2 = -D
        re = a * e - b * f + D * (c * g) - D * (d * h)
        im = a * f + b * e + D * (c * h) + D * (d * g)
        sq = a * g + c * e - b * h - d * f
        isq = a * h + d * e + b * g + c * f
        return FieldElement(D, (re, im, sq, isq))

    def __add__(self, o):
        return FieldElement(self.D, tuple(x + y for x, y in zip(self.coeffs, o.coeffs)))

    def scale(self, c) -> FieldElement:
        return FieldElement(self.D, tuple(c * x for x in self.coeffs))

    def complex_conj(self) -> FieldElement:
        a, b, c, d = self.coeffs
        return FieldElement(self.D, (a, -b, c, -d))

    def sigma(self) -> FieldElement:
        """i -> -i, s -> -s (fixes i s)."""
        a, b, c, d = self.coeffs
        return FieldElement(self.D, (a, -b, -c, d))

    def tau(self) -> FieldElement:
        """s -> -s, fixes i."""
        a, b, c, d = self.coeffs
        return FieldElement(self.D, (a, b, -c, -d))

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def inverse(self) -> FieldElement:
        # multiply by the three other conjugates
        conjs = self.complex_conj() * self.sigma() * self.tau()
        n = self * conjs
        if not n.is_rational() or n.coeffs[0] == 0:
            raise ZeroDivisionError("not invertible")
        return conjs.scale(1 / n.coeffs[0])

    def norm_to_Q(self) -> Fraction:
        n = self * self.complex_conj() * self.sigma() * self.tau()
        return n.coeffs[0]

    def integral_form(self):
        den = 1
        for x in self.coeffs:
            den = math.lcm(den, x.denominator)
        return [int(x * den) for x in self.coeffs], den


@dataclass(frozen=True)
class FieldBasis:
    """Q(i, sqrt D) (D = 1 for Q(i)) with its p-adic embedding."""

    D: int
    p: int
    N: int
    names: tuple
    embeddings: tuple
    conj_signs: tuple

    @classmethod
    def make(cls, D: int, p: int, N: int, iota_sign: int = 1) -> FieldBasis:
        """Basis 1, i (and sqrt D, i sqrt D when D != 1)."""
        one = QuadExtApprox.from_parts(1, 0, p, N)
        i = QuadExtApprox.sqrt_rational(-1, p, N)
        if iota_sign < 0:
            i = -i
        if D == 1:
            return cls(1, p, N, ("1", "i"), (one, i), (1, -1))
        s = QuadExtApprox.sqrt_rational(D, p, N)
        return cls(D, p, N, ("1", "i", f"sqrt({D})", f"sqrt({-D})"), (one, i, s, i * s), (1, -1, 1, -1))

    def embed(self, x: FieldElement) -> QuadExtApprox:
        acc = None
        for c, e in zip(x.coeffs, self.embeddings):
            if c:
                t = e * c
                acc = t if acc is None else acc + t
        if acc is None:
            raise ValueError("zero element")
        return acc

    def element(self, coeffs, den=1) -> FieldElement:
        full = list(coeffs) + [0] * (4 - len(coeffs))
        return FieldElement(self.D, [Fraction(c, den) for c in full])


@dataclass
class RecognitionResult:
    field: FieldBasis
    element: FieldElement
    coeffs: list
    den: int
    height: int
    residual_margin: float
    mode: str
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"coeffs": self.coeffs, "den": self.den, "field": list(self.field.names),
                "height": self.height, "residual_margin": self.residual_margin, "mode": self.mode}


def _components(x: QuadExtApprox, M: int):
    """Integer pair (re, om) of x modulo p^M (x integral)."""
    p = x.p
    if x.zero:
        return 0, 0
    if x.val < 0:
        raise ValueError("expected an integral element")
    mod = p**M
    a, b = x.pair()
    s = p**x.val
    return a * s % mod, b * s % mod


def _relation_lattice(columns, p: int, M: int):
    """Short integer vectors c with sum c_j columns_j = 0 mod p^M (columns: integer pairs)."""
    n = len(columns)
    mod = p**M
    live = [r for r in range(2) if any(col[r] % mod for col in columns)]
    W = mod * (1 << (n + 2))
    rows = []
    for j, col in enumerate(columns):
        rows.append([int(j == k) for k in range(n)] + [W * (col[r] % mod) for r in live])
    for idx in range(len(live)):
        rows.append([0] * n + [W * mod if r == idx else 0 for r in range(len(live))])
    red = lll_reduce(_independent(rows))
    rels = [r[:n] for r in red if not any(r[n:])]
    rels.sort(key=lambda v: sum(x * x for x in v))
    return rels


def _independent(rows):
    """Drop rows that are dependent (the modulus rows duplicate when a component is unused)."""
    out = []
    for r in rows:
        trial = out + [r]
        if _rank(trial) == len(trial):
            out = trial
    return out


def _rank(rows):
    a = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    cols = len(a[0]) if a else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][c]:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def recognize_algebraic(value: QuadExtApprox, fb: FieldBasis, digits: int | None = None,
                        H: float | None = None, margin_digits: int = 10, mode: str = "linear"):
    """Find x in Q(i, sqrt D) with embedding equal to value mod p^digits.

    mode "linear": shortest (a_j, den) with sum a_j e_j - den * value = 0.
    mode "auto" tries linear first, then norm_one.
    mode "norm_one": x = z / c(z) for complex conjugation c, solving
    c(z) value - z = 0 for z; exact for values of norm one to the fixed field.
    The shortest relation must be p^margin_digits times shorter than the next
    independent one.
    """
    if mode == "auto":
        try:
            return recognize_algebraic(value, fb, digits, H, margin_digits, "linear")
        except NoRelation as first:
            try:
                return recognize_algebraic(value, fb, digits, H, margin_digits, "norm_one")
            except NoRelation as second:
                raise NoRelation(f"linear: {first}; norm_one: {second}") from None
    p = fb.p
    M = min(value.N, fb.N) if digits is None else digits
    shift = max(0, -value.val)
    scaled = value * p**shift if shift else value
    Mv = min(M, scaled.N)
    cols_e = [_components(e, Mv) for e in fb.embeddings]
    if mode == "linear":
        prods = [_components(scaled, Mv)]
        columns = cols_e + [tuple(-x for x in prods[0])]
    elif mode == "norm_one":
        lift = p**shift
        columns = []
        for e, sgn in zip(fb.embeddings, fb.conj_signs):
            ce = _components(scaled * e * sgn, Mv)
            ee = _components(e * lift, Mv)
            columns.append((ce[0] - ee[0], ce[1] - ee[1]))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rels = _relation_lattice(columns, p, Mv)
    if not rels:
        raise NoRelation("no relation in the reduced basis")
    best = rels[0]
    if all(x == 0 for x in best):
        raise NoRelation("degenerate relation")
    l1 = math.sqrt(sum(x * x for x in best))
    span = [best]
    if mode == "norm_one" and fb.D != 1:
        # z and z sqrt(D) solve the same equation
        zs = fb.element(best) * fb.element([0, 0, 1, 0])
        span.append([int(c) for c in zs.coeffs[: len(best)]])
    nxt = next((r for r in rels[1:] if _rank(span + [r]) > len(span)), None)
    if nxt is None:
        ratio_digits = float("inf")
    else:
        l2 = math.sqrt(sum(x * x for x in nxt))
        ratio_digits = math.log(l2 / l1, p)
    if ratio_digits < margin_digits:
        raise NoRelation(f"relation not separated: next relation only p^{ratio_digits:.1f} longer")
    if mode == "linear":
        *a, d = best
        if d == 0:
            raise NoRelation("relation does not involve the value")
        x = fb.element(a, d * p**shift)
    else:
        z = fb.element(best)
        x = z * z.complex_conj().inverse()
    coeffs, den = x.integral_form()
    if den < 0:
        coeffs, den = [-c for c in coeffs], -den
    g = math.gcd(den, *coeffs)
    coeffs, den = [c // g for c in coeffs], den // g
    x = fb.element(coeffs, den)
    height = max([abs(c) for c in coeffs] + [den])
    if H is not None and height > H:
        raise NoRelation(f"height {height} exceeds bound {H}")
    check = fb.embed(x)
    if not check == value:
        raise NoRelation("recognized element does not reproduce the value")
    return RecognitionResult(fb, x, coeffs[:len(fb.names)], den, height, ratio_digits, mode)


def _parallel(u, v) -> bool:
    return all(u[i] * v[j] == u[j] * v[i] for i in range(len(u)) for j in range(len(u)))


# norms and splitting ------------------------------------------------------------

def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for a prime n."""
    if n == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    return int(sympy.jacobi_symbol(d % n, n))


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt d)."""
    sign = -1 if d < 0 else 1
    core = sign
    for q, e in sympy.factorint(abs(d)).items():
        if e % 2:
            core *= q
    return core if core % 4 == 1 else 4 * core


def splitting(prime: int, disc: int) -> str:
    if disc % prime == 0:
        return "ramified"
    return "split" if kronecker(disc, prime) == 1 else "inert"


def factor_rational(x: Fraction):
    out = []
    for part, sgn in ((x.numerator, 1), (x.denominator, -1)):
        for q, e in sorted(sympy.factorint(abs(part)).items()):
            out.append((int(q), sgn * int(e)))
    return sorted(out)


def reflex_norm(x: FieldElement, reflex: str) -> FieldElement:
    """Norm to Q(sqrt D) ("rm") or to Q(sqrt -D) ("cm"); on Q(i) both are x times its conjugate."""
    if reflex == "rm":
        return x * x.complex_conj()
    if reflex == "cm":
        return x * x.sigma()
    raise ValueError(reflex)


def norm_and_splitting(res: RecognitionResult, reflex_disc: int, reflex: str = "rm"):
    x = res.element
    if x.D == 1:
        nq = (x * x.complex_conj()).coeffs[0]
        rn = x * x.complex_conj()
    else:
        nq = x.norm_to_Q()
        rn = reflex_norm(x, reflex)
    to_factor = rn.coeffs[0] if rn.is_rational() else nq
    factors = [{"prime": q, "exponent": e, "splitting": splitting(q, reflex_disc)}
               for q, e in factor_rational(Fraction(to_factor))]
    return {"norm_Q": str(nq), "reflex_norm": [str(c) for c in rn.coeffs],
            "reflex_disc": reflex_disc, "factors": factors,
            "den_factors": [{"prime": q, "exponent": e, "splitting": splitting(q, reflex_disc)}
                            for q, e in factor_rational(Fraction(res.den))]}


def report_json(res: RecognitionResult, reflex_disc: int, reflex: str = "rm") -> str:
    d = res.to_json()
    ns = norm_and_splitting(res, reflex_disc, reflex)
    d["norm"] = ns["norm_Q"]
    d["factors"] = ns["factors"]
    return json.dumps(d, sort_keys=True)
