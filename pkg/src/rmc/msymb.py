"""Modular symbols built from the period function J(0, oo).

Paths between cusps are cut into unimodular edges joining a cusp of
0-type (denominator a unit mod 2, or mod 1+i over Z[i]) to one of oo-type
(denominator divisible by 2).  Such an edge is g(0 -> oo) for some g of
determinant 1 with lower-left entry even, so the symbol on it is the period
function at g^-1 x, inverted when the edge runs from oo-type to 0-type.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .padic import PadicApprox, QuadExtApprox
from .rigidprod import (NotRegular, PeriodFunctionSpec, PointX, affinoid_level, eval_period_many,
                        gaussian_embedding)


class NoFundamentalSolution(ValueError):
    pass


# Gaussian integers ----------------------------------------------------------

@dataclass(frozen=True)
class GaussInt:
    re: int
    im: int = 0

    @staticmethod
    def of(x) -> GaussInt:
        if isinstance(x, GaussInt):
            return x
        if isinstance(x, complex):
            return GaussInt(int(x.real), int(x.imag))
        return GaussInt(int(x), 0)

    def __add__(self, o):
        o = GaussInt.of(o)
        return GaussInt(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GaussInt.of(o)
        return GaussInt(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussInt.of(o) - self

    def __neg__(self):
        return GaussInt(-self.re, -self.im)

    def __mul__(self, o):
        o = GaussInt.of(o)
        return GaussInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def conj(self) -> GaussInt:
        return GaussInt(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def unit_inverse(self) -> GaussInt:
        if not self.is_unit():
            raise ValueError(f"{self} is not a unit")
        return self.conj()

    def exact_div(self, o) -> GaussInt:
        o = GaussInt.of(o)
        n = o.norm()
        t = self * o.conj()
        if t.re % n or t.im % n:
            raise ValueError("inexact division")
        return GaussInt(t.re // n, t.im // n)

    def mod2(self) -> tuple:
        return self.re % 2, self.im % 2

    def __repr__(self):
        return f"({self.re}{self.im:+d}i)" if self.im else str(self.re)


def gcd_gauss(a: GaussInt, b: GaussInt) -> GaussInt:
    while not b.is_zero():
        a, b = b, a - b * _round_quotient(a, b)
    return a


def _round_quotient(a: GaussInt, b: GaussInt) -> GaussInt:
    n = b.norm()
    t = a * b.conj()
    return GaussInt(_round_div(t.re, n), _round_div(t.im, n))


def _round_div(x: int, n: int) -> int:
    return (2 * x + n) // (2 * n)


# cusps and group elements ---------------------------------------------------

@dataclass(frozen=True)
class Cusp:
    """a/c in P^1 over Z (ints) or Z[i] (GaussInt); c = 0 is infinity."""

    a: object
    c: object

    def __post_init__(self):
        if self.gaussian:
            g = gcd_gauss(GaussInt.of(self.a), GaussInt.of(self.c))
            if not g.is_unit():
                raise ValueError("cusp coordinates not coprime")
        elif math.gcd(self.a, self.c) != 1:
            raise ValueError("cusp coordinates not coprime")

    @property
    def gaussian(self) -> bool:
        return isinstance(self.a, GaussInt) or isinstance(self.c, GaussInt)

    @classmethod
    def of(cls, x) -> Cusp:
        if isinstance(x, Cusp):
            return x
        if x == "oo" or x is None:
            return cls(1, 0)
        f = Fraction(x)
        return cls(f.numerator, f.denominator)

    @classmethod
    def infinity(cls) -> Cusp:
        return cls(1, 0)

    def kind(self) -> str:
        """'oo' when c is divisible by 2, '0' when c is a unit mod 2, else 'bad'."""
        if self.gaussian:
            r = GaussInt.of(self.c).mod2()
            if r == (0, 0):
                return "oo"
            if r == (1, 1):
                return "bad"
            return "0"
        return "oo" if self.c % 2 == 0 else "0"

    def same(self, other: Cusp) -> bool:
        if self.gaussian or other.gaussian:
            d = GaussInt.of(self.a) * GaussInt.of(other.c) - GaussInt.of(other.a) * GaussInt.of(self.c)
            return d.is_zero()
        return self.a * other.c == other.a * self.c

    def __repr__(self):
        return "oo" if self.c in (0, GaussInt(0)) else f"{self.a}/{self.c}"


@dataclass(frozen=True)
class GammaElement:
    """[[a, b], [c, d]] of determinant 1 over Z or Z[i]."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det != 1 and det != GaussInt(1):
            raise ValueError(f"determinant {det} != 1")

    @classmethod
    def identity(cls) -> GammaElement:
        return cls(1, 0, 0, 1)

    @property
    def gaussian(self) -> bool:
        return any(isinstance(x, GaussInt) for x in (self.a, self.b, self.c, self.d))

    def __matmul__(self, o: GammaElement) -> GammaElement:
        return GammaElement(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def inverse(self) -> GammaElement:
        return GammaElement(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> GammaElement:
        base = self if n >= 0 else self.inverse()
        out = GammaElement.identity()
        for _ in range(abs(n)):
            out = out @ base
        return out

    def in_level_two(self) -> bool:
        c = GaussInt.of(self.c)
        return c.mod2() == (0, 0)

    def act_cusp(self, r: Cusp) -> Cusp:
        a = self.a * r.a + self.b * r.c
        c = self.c * r.a + self.d * r.c
        if isinstance(a, GaussInt) or isinstance(c, GaussInt):
            a, c = GaussInt.of(a), GaussInt.of(c)
        elif c < 0 or (c == 0 and a < 0):
            a, c = -a, -c
        return Cusp(a, c)

    def entries(self):
        return (self.a, self.b, self.c, self.d)


def _embed_entry(x, iota: PadicApprox | None, conj: bool):
    if isinstance(x, GaussInt):
        if x.im == 0:
            return x.re
        if iota is None:
            raise ValueError("Gaussian entry needs an embedding of i")
        return iota * (-x.im if conj else x.im) + x.re
    return x


def mobius(g: GammaElement, tau: QuadExtApprox, iota=None, conj=False) -> QuadExtApprox:
    a, b, c, d = (_embed_entry(x, iota, conj) for x in g.entries())
    num = tau * a + b
    den = tau * c + d
    return num / den


def act_point(g: GammaElement, pt: PointX) -> PointX:
    """g . pt; on pairs the second coordinate sees the conjugate matrix."""
    if pt.model == "sig21":
        return PointX.sig21(mobius(g, pt.taus[0]))
    if pt.model == "sig31-bianchi":
        t1, t2 = pt.taus
        iota = gaussian_embedding(t1.p, max(t1.N, t2.N) + 2) if g.gaussian else None
        return PointX.bianchi(mobius(g, t1, iota, False), mobius(g, t2, iota, True))
    raise ValueError("group action on points defined for the hyperbolic models")


# paths --------------------------------------------------------------------------

def _convergents(x: Cusp):
    """Cusps oo, p0/q0, ..., x from the continued fraction of x over Z."""
    n, d = x.a, x.c
    out = [Cusp(1, 0)]
    if d == 0:
        return out
    h2, h1, k2, k1 = 0, 1, 1, 0
    while d:
        q = n // d
        n, d = d, n - q * d
        h, k = q * h1 + h2, q * k1 + k2
        if k < 0:
            h, k = -h, -k
        out.append(Cusp(h, k))
        h2, h1, k2, k1 = h1, h, k1, k
    return out


def _gauss_convergents(x: Cusp):
    """Convergents of a Gaussian continued fraction of x avoiding bad cusps.

    Depth-first search over the quotients with remainder of smaller norm;
    ends at x, which must itself be of good type.
    """
    a, c = GaussInt.of(x.a), GaussInt.of(x.c)
    start = [Cusp(GaussInt(1), GaussInt(0))]
    if c.is_zero():
        return start

    def quotients(n, d):
        q0 = _round_quotient(n, d)
        cands = []
        for dr in (-1, 0, 1):
            for di in (-1, 0, 1):
                q = q0 + GaussInt(dr, di)
                r = n - q * d
                if r.norm() < d.norm():
                    cands.append((r.norm(), q, r))
        cands.sort(key=lambda t: (t[0], t[1].re, t[1].im))
        return cands

    def search(n, d, h2, h1, k2, k1, depth):
        if depth > 200:
            return None
        for _, q, r in quotients(n, d):
            h, k = q * h1 + h2, q * k1 + k2
            cusp = Cusp(h, k)
            if r.is_zero():
                return [cusp]
            if cusp.kind() == "bad":
                continue
            rest = search(d, r, h1, h, k1, k, depth + 1)
            if rest is not None:
                return [cusp] + rest
        return None

    tail = search(a, c, GaussInt(0), GaussInt(1), GaussInt(1), GaussInt(0), 0)
    if tail is None:
        raise ValueError(f"no good continued fraction for {x}")
    return start + tail


def cusp_chain(r: Cusp, s: Cusp):
    """Unimodular chain of cusps from r to s through oo, with backtracks removed."""
    gaussian = r.gaussian or s.gaussian
    if gaussian:
        r = Cusp(GaussInt.of(r.a), GaussInt.of(r.c))
        s = Cusp(GaussInt.of(s.a), GaussInt.of(s.c))
        conv = _gauss_convergents
    else:
        conv = _convergents
    chain = list(reversed(conv(r))) + conv(s)[1:]
    out = []
    for x in chain:
        if out and out[-1].same(x):
            continue
        if len(out) >= 2 and out[-2].same(x):
            out.pop()
            continue
        out.append(x)
    return out


def _det(x: Cusp, y: Cusp):
    return x.a * y.c - y.a * x.c


def decompose_path(r, s):
    """Edges (g, eps): the path r -> s equals the sum of eps * g(0 -> oo).

    eps = +1 for an edge from a 0-type to an oo-type cusp, -1 for the reverse.
    Consecutive 0-type cusps are joined through an intermediate oo-type cusp.
    """
    r, s = Cusp.of(r), Cusp.of(s)
    if r.same(s):
        return []
    for x in (r, s):
        if x.kind() == "bad":
            raise ValueError(f"cusp {x} is not equivalent to 0 or oo")
    chain = cusp_chain(r, s)
    full = [chain[0]]
    for x, y in zip(chain, chain[1:]):
        if x.kind() == "0" and y.kind() == "0":
            full.append(_intermediate(x, y))
        full.append(y)
    edges = []
    for x, y in zip(full, full[1:]):
        if x.kind() == "0" and y.kind() == "oo":
            edges.append((_edge_element(x, y), 1))
        elif x.kind() == "oo" and y.kind() == "0":
            edges.append((_edge_element(y, x), -1))
        else:
            raise AssertionError(f"edge {x} -> {y} joins cusps of the same type")
    return edges


def _intermediate(x: Cusp, y: Cusp) -> Cusp:
    if not x.gaussian:
        return Cusp(x.a + y.a, x.c + y.c)
    for u in (GaussInt(1), GaussInt(0, 1), GaussInt(-1), GaussInt(0, -1)):
        m = Cusp(x.a + u * y.a, x.c + u * y.c)
        if m.kind() == "oo":
            return m
    raise AssertionError("no intermediate cusp")


def _edge_element(zero: Cusp, inf: Cusp) -> GammaElement:
    """g with g(0) = zero and g(oo) = inf, determinant 1."""
    det = inf.a * zero.c - zero.a * inf.c
    if isinstance(det, GaussInt):
        x = det.unit_inverse()
        return GammaElement(inf.a, zero.a * x, inf.c, zero.c * x)
    if det not in (1, -1):
        raise AssertionError("cusps not adjacent")
    return GammaElement(inf.a, zero.a * det, inf.c, zero.c * det)


# evaluation ---------------------------------------------------------------------

def cocycle_symbol_many(spec: PeriodFunctionSpec, r, s, pts, J=None):
    """J(r, s) at each point: product of the period function at g^-1 x over the path edges."""
    edges = decompose_path(r, s)
    if not edges:
        one = pts[0].vxi[0]
        return [QuadExtApprox.from_parts(1, 0, one.p, spec.N, one.kind, one.u) for _ in pts]
    moved = [act_point(g.inverse(), pt) for pt in pts for g, _ in edges]
    vals = eval_period_many(spec, moved, J=J)
    out = []
    n = len(edges)
    for i in range(len(pts)):
        acc = None
        for (g, eps), v in zip(edges, vals[i * n:(i + 1) * n]):
            term = v if eps > 0 else v.inverse()
            acc = term if acc is None else acc * term
        out.append(acc)
    return out


def cocycle_symbol(spec: PeriodFunctionSpec, r, s, pt: PointX, J=None):
    return cocycle_symbol_many(spec, r, s, [pt], J=J)[0]


# special points -----------------------------------------------------------------

def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def fundamental_unit(D: int):
    """(t, u, sign): smallest solution of t^2 - D u^2 = 4*sign with u > 0, sign = -1 if possible."""
    if D <= 0 or _is_square(D):
        raise NoFundamentalSolution(f"discriminant {D} must be positive and non-square")
    if D % 4 == 0:
        # (P + sqrt(D/4)) expansion; t = 2x, u = y
        n, half, shift = D // 4, False, 0
    elif D % 4 == 1:
        n, half, shift = D, True, 1
    else:
        raise NoFundamentalSolution(f"{D} is not a discriminant")
    # continued fraction of (shift + sqrt(n)) / (1 + half) via (P + sqrt n)/Q
    P, Q = shift, 2 if half else 1
    s = math.isqrt(n)
    h2, h1, k2, k1 = 0, 1, 1, 0
    for _ in range(10**6):
        a = (P + s) // Q
        h, k = a * h1 + h2, a * k1 + k2
        if half:
            t, u = 2 * h - k, k
        else:
            t, u = 2 * h, k
        val = t * t - D * u * u
        if val in (4, -4) and u > 0:
            return t, u, val // 4
        h2, h1, k2, k1 = h1, h, k1, k
        P = a * Q - P
        Q = (n - P * P) // Q
    raise NoFundamentalSolution("continued fraction did not close")


def automorph(form, level_two: bool = True, gaussian: bool = False, power: int = 1) -> GammaElement:
    """Generator of the stabilizer of the roots of A x^2 + B x + C.

    Integral: [[(t-Bu)/2, -Cu], [Au, (t+Bu)/2]] from t^2 - D u^2 = 4, raised to
    the least power with even lower-left entry.  With ``gaussian`` and a
    solution of t^2 - D u^2 = -4, the same matrix built from it has
    determinant -1 and i times it lies in SL_2(Z[i]).
    """
    A, B, C = form
    D = B * B - 4 * A * C
    t, u, sign = fundamental_unit(D)

    def build(t, u, scale):
        m = [(t - B * u) // 2, -C * u, A * u, (t + B * u) // 2]
        if scale:
            return GammaElement(*(GaussInt(0, x) for x in m))
        return GammaElement(*m)

    if sign == -1 and gaussian:
        g = build(t, u, True)
    else:
        if sign == -1:
            t, u = (t * t + D * u * u) // 2, t * u
        g = build(t, u, False)
    base = g
    n = 1
    while level_two and not g.in_level_two():
        g = g @ base
        n += 1
        if n > 12:
            raise NoFundamentalSolution("no power of the automorph lies in the level-two group")
    return g ** power


@dataclass(frozen=True)
class SpecialPointData:
    model: str
    form: tuple
    flip: bool = False
    orientation: int = 1

    @property
    def disc(self) -> int:
        A, B, C = self.form
        return B * B - 4 * A * C

    @classmethod
    def from_disc(cls, model: str, D: int, flip: bool = False, orientation: int = 1) -> SpecialPointData:
        """Form (2, -b, (b^2 - D)/8) with the least b >= 0 such that b^2 = D mod 8."""
        for b in range(0, 8):
            if (b * b - D) % 8 == 0:
                return cls(model, (2, -b, (b * b - D) // 8), flip, orientation)
        raise ValueError(f"no form (2, B, C) of discriminant {D}")

    def roots(self, p: int, N: int):
        A, B, C = self.form
        r = QuadExtApprox.sqrt_rational(self.disc, p, N)
        inv = Fraction(1, 2 * A)
        return (r - B) * inv, (-r - B) * inv

    def point(self, p: int, N: int) -> PointX:
        tau, tau2 = self.roots(p, N)
        if self.model == "sig21":
            return PointX.sig21(tau)
        if self.model == "sig31-bianchi":
            return PointX.bianchi(tau, tau2 if self.flip else tau)
        raise ValueError(f"special points not defined for model {self.model}")


def normalize_sign(x: QuadExtApprox) -> QuadExtApprox:
    """Representative of {x, -x} whose leading digit lies in 1..(p-1)/2."""
    if x.zero:
        return x
    p = x.p
    lead = x.a % p if x.a % p else x.b % p
    return -x if lead > (p - 1) // 2 else x


@dataclass
class SpecialValue:
    value: QuadExtApprox
    digits: int
    level: int
    automorph: GammaElement
    point: PointX


def eval_special(spec: PeriodFunctionSpec, x: SpecialPointData, J=None, guard: int = 8) -> SpecialValue:
    """J(0, gamma 0)(x) for the automorph gamma, up to sign."""
    p = spec.p
    prec = spec.N + guard + 2 * (J or spec.N)
    pt = x.point(p, prec)
    k = affinoid_level(pt, spec.model)
    gamma = automorph(x.form, gaussian=x.model == "sig31-bianchi", power=x.orientation)
    target = gamma.act_cusp(Cusp(0, 1))
    try:
        val = cocycle_symbol(spec, Cusp(0, 1), target, pt, J=J)
    except NotRegular as e:
        raise NotRegular(f"discriminant {x.disc}: {e}") from e
    return SpecialValue(normalize_sign(val), val.N, k, gamma, pt)
