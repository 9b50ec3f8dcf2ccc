"""Fixed precision arithmetic in Q_p and its quadratic extensions.

Elements are stored as ``p**val * unit`` with the unit known modulo ``p**N``
(``N`` significant digits).  Zero is an explicit flag carrying the absolute
precision to which it is known.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class NonResidue(ValueError):
    """The unit part is not a square modulo p."""


class OddValuation(ValueError):
    """Square root requested of an element of odd valuation."""


class PrecisionLoss(ArithmeticError):
    """An operation left fewer than one significant digit."""


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def split_rational(x, p: int) -> tuple[int, Fraction]:
    """Write a nonzero rational as p**v * u with u a p-adic unit."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("split of 0")
    vn = valuation(x.numerator, p)
    vd = valuation(x.denominator, p)
    return vn - vd, Fraction(x.numerator // p**vn, x.denominator // p**vd)


def unit_mod(u: Fraction, p: int, N: int) -> int:
    """Residue of the p-adic unit ``u`` modulo p**N."""
    mod = p**N
    return u.numerator * pow(u.denominator, -1, mod) % mod


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@lru_cache(maxsize=None)
def smallest_nonresidue(p: int) -> int:
    for u in range(2, p):
        if legendre(u, p) == -1:
            return u
    raise ValueError(f"no non-residue mod {p}")


def _check_prime(p: int) -> None:
    if p < 3 or p % 2 == 0 or any(p % q == 0 for q in range(3, int(p**0.5) + 1, 2)):
        raise ValueError(f"p must be an odd prime, got {p}")


def sqrt_unit_mod(a: int, p: int, N: int) -> int:
    """Square root of a unit modulo p**N on the canonical branch.

    The branch is the root whose residue mod p is the smaller of the two.
    """
    a %= p**N
    if a % p == 0:
        raise ValueError("sqrt_unit_mod needs a unit")
    if legendre(a, p) != 1:
        raise NonResidue(f"{a % p} is not a square mod {p}")
    r0 = min(r for r in range(1, p) if (r * r - a) % p == 0)
    # Newton iteration doubles the number of correct digits each round
    r, k = r0, 1
    while k < N:
        k = min(2 * k, N)
        mod = p**k
        r = (r + a * pow(r, -1, mod)) * pow(2, -1, mod) % mod
    return r % p**N


@dataclass(frozen=True)
class PadicApprox:
    """An element of Q_p known to N significant digits."""

    p: int
    N: int
    val: int
    unit: int
    zero: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise PrecisionLoss("no significant digits left")
        if not self.zero and self.unit % self.p == 0:
            raise ValueError("unit part divisible by p")

    @classmethod
    def from_rational(cls, x, p: int, N: int) -> PadicApprox:
        _check_prime(p)
        x = Fraction(x)
        if x == 0:
            return cls.zero_element(p, N)
        v, u = split_rational(x, p)
        return cls(p, N, v, unit_mod(u, p, N))

    @classmethod
    def zero_element(cls, p: int, N: int, absprec: int | None = None) -> PadicApprox:
        # a zero known to absolute precision p**absprec
        return cls(p, N, N if absprec is None else absprec, 0, True)

    def _coerce(self, other) -> PadicApprox:
        if isinstance(other, PadicApprox):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicApprox.from_rational(other, self.p, self.N)
        return NotImplemented

    @property
    def absprec(self) -> int:
        return self.val if self.zero else self.val + self.N

    def is_unit(self) -> bool:
        return not self.zero and self.val == 0

    def residue(self) -> int:
        return 0 if self.zero or self.val > 0 else self.unit % self.p

    def lift(self) -> Fraction:
        """The rational p**val * unit with 0 <= unit < p**N."""
        if self.zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def to_int(self, k: int | None = None) -> int:
        """Integer representative modulo p**k (default: the absolute precision)."""
        if self.zero:
            return 0
        if self.val < 0:
            raise ValueError("not integral")
        k = self.absprec if k is None else k
        return self.unit * self.p**self.val % self.p**k

    def __neg__(self):
        if self.zero:
            return self
        return PadicApprox(self.p, self.N, self.val, -self.unit % self.p**self.N)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        absprec = min(self.absprec, other.absprec)
        if self.zero and other.zero:
            return PadicApprox.zero_element(p, min(self.N, other.N), absprec)
        terms = [x for x in (self, other) if not x.zero]
        e = min(x.val for x in terms)
        k = absprec - e
        if k <= 0:
            return PadicApprox.zero_element(p, min(self.N, other.N), absprec)
        mod = p**k
        s = sum(x.unit * p ** (x.val - e) for x in terms) % mod
        if s == 0:
            return PadicApprox.zero_element(p, min(self.N, other.N), absprec)
        shift = valuation(s, p)
        return PadicApprox(p, k - shift, e + shift, (s // p**shift) % p ** (k - shift))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        N = min(self.N, other.N)
        if self.zero or other.zero:
            a = self if self.zero else other
            b = other if self.zero else self
            extra = b.val if not b.zero else b.absprec
            return PadicApprox.zero_element(self.p, N, a.absprec + extra)
        return PadicApprox(self.p, N, self.val + other.val, self.unit * other.unit % self.p**N)

    __rmul__ = __mul__

    def inverse(self) -> PadicApprox:
        if self.zero:
            raise ZeroDivisionError("inverse of p-adic zero")
        return PadicApprox(self.p, self.N, -self.val, pow(self.unit, -1, self.p**self.N))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if self.zero:
            return self if n else PadicApprox.from_rational(1, self.p, self.N)
        return PadicApprox(self.p, self.N, self.val * n, pow(self.unit, n, self.p**self.N))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PadicApprox.from_rational(other, self.p, self.N)
        if not isinstance(other, PadicApprox) or other.p != self.p:
            return NotImplemented
        if self.zero or other.zero:
            return self.zero and other.zero
        if self.val != other.val:
            return False
        k = min(self.N, other.N)
        return (self.unit - other.unit) % self.p**k == 0

    def __hash__(self):
        return hash((self.p, self.val, self.zero))

    def __repr__(self):
        if self.zero:
            return f"O({self.p}^{self.val})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.absprec})"


def hensel_sqrt(a, p: int | None = None, N: int | None = None) -> PadicApprox:
    """Square root in Q_p on the canonical branch (smaller residue mod p)."""
    if not isinstance(a, PadicApprox):
        a = PadicApprox.from_rational(a, p, N)
    if a.zero:
        raise ValueError("hensel_sqrt of zero")
    if a.val % 2:
        raise OddValuation(f"valuation {a.val} is odd")
    r = sqrt_unit_mod(a.unit, a.p, a.N)
    return PadicApprox(a.p, a.N, a.val // 2, r)


UNRAMIFIED = "unramified"
RAMIFIED = "ramified"


@dataclass(frozen=True)
class QuadExtApprox:
    """p**val * (a + b*omega) with omega**2 = u (unramified) or p*u (ramified).

    The pair (a, b) is known modulo p**N and is not divisible by p.
    """

    p: int
    N: int
    kind: str
    u: int
    val: int
    a: int
    b: int
    zero: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise PrecisionLoss("no significant digits left")
        if not self.zero and self.a % self.p == 0 and self.b % self.p == 0:
            raise ValueError("pair not normalized")

    # construction

    @classmethod
    def unramified(cls, p: int, N: int) -> QuadExtApprox:
        """The generator omega with omega**2 the smallest non-residue."""
        _check_prime(p)
        return cls(p, N, UNRAMIFIED, smallest_nonresidue(p), 0, 0, 1)

    @classmethod
    def from_parts(cls, a, b, p: int, N: int, kind: str = UNRAMIFIED, u: int | None = None):
        """Element a + b*omega from rationals or PadicApprox components."""
        _check_prime(p)
        if u is None:
            u = smallest_nonresidue(p)
        parts = []
        for x in (a, b):
            if not isinstance(x, PadicApprox):
                x = PadicApprox.from_rational(x, p, N)
            parts.append(x)
        return cls._from_padics(parts[0], parts[1], kind, u)

    @classmethod
    def _from_padics(cls, a: PadicApprox, b: PadicApprox, kind: str, u: int):
        p = a.p
        absprec = min(a.absprec, b.absprec)
        nz = [x for x in (a, b) if not x.zero]
        if not nz:
            return cls(p, max(1, min(a.N, b.N)), kind, u, absprec, 0, 0, True)
        e = min(x.val for x in nz)
        k = absprec - e
        if k <= 0:
            return cls(p, max(1, min(a.N, b.N)), kind, u, absprec, 0, 0, True)
        mod = p**k
        ia = 0 if a.zero else a.unit * p ** (a.val - e) % mod
        ib = 0 if b.zero else b.unit * p ** (b.val - e) % mod
        return cls._normalized(p, k, kind, u, e, ia, ib)

    @classmethod
    def _normalized(cls, p, k, kind, u, e, ia, ib):
        mod = p**k
        ia %= mod
        ib %= mod
        if ia == 0 and ib == 0:
            return cls(p, 1, kind, u, e + k, 0, 0, True)
        s = 0
        while ia % p == 0 and ib % p == 0:
            ia //= p
            ib //= p
            s += 1
        if k - s < 1:
            raise PrecisionLoss("cancellation exhausted precision")
        mod = p ** (k - s)
        return cls(p, k - s, kind, u, e + s, ia % mod, ib % mod)

    @classmethod
    def from_unit_pair(cls, a: int, b: int, val: int, p: int, N: int, kind=UNRAMIFIED, u=None):
        if u is None:
            u = smallest_nonresidue(p)
        return cls._normalized(p, N, kind, u, val, a, b)

    @classmethod
    def sqrt_rational(cls, d, p: int, N: int) -> QuadExtApprox:
        """Embedding of sqrt(d) for rational d, on a deterministic branch.

        Residues give an element of Q_p; non-residues of even valuation give
        omega times a Q_p root; odd valuation uses the ramified extension
        omega**2 = p*u with u the unit part of d.
        """
        _check_prime(p)
        v, unit = split_rational(d, p)
        w = unit_mod(unit, p, N)
        nr = smallest_nonresidue(p)
        if v % 2 == 0:
            if legendre(w, p) == 1:
                return cls.from_parts(PadicApprox(p, N, v // 2, sqrt_unit_mod(w, p, N)), 0, p, N)
            r = sqrt_unit_mod(w * pow(nr, -1, p**N), p, N)
            return cls(p, N, UNRAMIFIED, nr, v // 2, 0, r)
        # sqrt(p^v * w) = p^((v-1)/2) * omega with omega^2 = p*w
        return cls(p, N, RAMIFIED, w, (v - 1) // 2, 0, 1)

    # helpers

    @property
    def omega_square(self) -> int:
        return self.u if self.kind == UNRAMIFIED else self.p * self.u

    @property
    def absprec(self) -> int:
        return self.val if self.zero else self.val + self.N

    def _compatible(self, other: QuadExtApprox):
        if (self.p, self.kind, self.u) != (other.p, other.kind, other.u):
            raise ValueError("elements of different extensions")

    def _coerce(self, other):
        if isinstance(other, QuadExtApprox):
            self._compatible(other)
            return other
        if isinstance(other, PadicApprox):
            return QuadExtApprox._from_padics(
                other, PadicApprox.zero_element(self.p, other.N, other.absprec + other.N),
                self.kind, self.u)
        if isinstance(other, (int, Fraction)):
            return QuadExtApprox.from_parts(other, 0, self.p, self.N, self.kind, self.u)
        return NotImplemented

    @property
    def re(self) -> PadicApprox:
        return self._component(self.a)

    @property
    def om(self) -> PadicApprox:
        return self._component(self.b)

    def _component(self, c: int) -> PadicApprox:
        p = self.p
        if self.zero or c % p**self.N == 0:
            return PadicApprox.zero_element(p, self.N, self.absprec)
        s = valuation(c, p)
        return PadicApprox(p, self.N - s, self.val + s, (c // p**s) % p ** (self.N - s))

    def pair(self, k: int | None = None) -> tuple[int, int]:
        """Integer pair (a, b) modulo p**k, of the unit-normalized element."""
        k = self.N if k is None else k
        mod = self.p**k
        return self.a % mod, self.b % mod

    def valuation(self):
        if self.zero:
            raise ValueError("valuation of zero")
        if self.kind == UNRAMIFIED or self.a % self.p:
            return self.val
        return Fraction(2 * self.val + 1, 2)

    def is_unit(self) -> bool:
        return not self.zero and self.valuation() == 0

    # arithmetic

    def __neg__(self):
        if self.zero:
            return self
        mod = self.p**self.N
        return QuadExtApprox(self.p, self.N, self.kind, self.u, self.val, -self.a % mod, -self.b % mod)

    def conj(self) -> QuadExtApprox:
        if self.zero:
            return self
        return QuadExtApprox(self.p, self.N, self.kind, self.u, self.val, self.a, -self.b % self.p**self.N)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadExtApprox._from_padics(self.re + other.re, self.om + other.om, self.kind, self.u)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        if self.zero or other.zero:
            nz = other if self.zero else self
            z = self if self.zero else other
            extra = 0 if nz.zero else int(nz.val)
            return QuadExtApprox(p, min(self.N, other.N), self.kind, self.u, z.absprec + extra, 0, 0, True)
        k = min(self.N, other.N)
        w = self.omega_square
        a = self.a * other.a + w * self.b * other.b
        b = self.a * other.b + self.b * other.a
        return QuadExtApprox._normalized(p, k, self.kind, self.u, self.val + other.val, a, b)

    __rmul__ = __mul__

    def norm(self) -> PadicApprox:
        if self.zero:
            return PadicApprox.zero_element(self.p, self.N, 2 * self.val)
        n = (self.a * self.a - self.omega_square * self.b * self.b) % self.p**self.N
        if n == 0:
            raise PrecisionLoss("norm vanishes at working precision")
        s = valuation(n, self.p)
        if s >= self.N:
            raise PrecisionLoss("norm below working precision")
        return PadicApprox(self.p, self.N - s, 2 * self.val + s, (n // self.p**s) % self.p ** (self.N - s))

    def trace(self) -> PadicApprox:
        return PadicApprox.from_rational(2, self.p, self.N) * self.re

    def inverse(self) -> QuadExtApprox:
        if self.zero:
            raise ZeroDivisionError("inverse of zero")
        n = self.norm()
        if n.N < 1:
            raise PrecisionLoss("inverse lost all digits")
        return self.conj() * n.inverse()

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadExtApprox.from_parts(1, 0, self.p, self.N, self.kind, self.u)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sqrt(self) -> QuadExtApprox:
        """Square root in the unramified extension.

        The branch is fixed by the lexicographically smaller residue pair.
        """
        if self.kind != UNRAMIFIED:
            raise ValueError("sqrt implemented for the unramified extension only")
        if self.zero:
            raise ValueError("sqrt of zero")
        if self.val % 2:
            raise OddValuation(f"valuation {self.val} is odd")
        p, N, w = self.p, self.N, self.u
        roots = [(x, y) for x in range(p) for y in range(p)
                 if (x * x + w * y * y - self.a) % p == 0 and (2 * x * y - self.b) % p == 0]
        if not roots:
            raise NonResidue("unit is not a square in the residue field")
        target = QuadExtApprox(p, N, self.kind, self.u, 0, self.a, self.b)
        x = QuadExtApprox.from_unit_pair(*min(roots), 0, p, N, self.kind, self.u)
        half = Fraction(1, 2)
        k = 1
        while k < N:
            k = min(2 * k, N)
            x = (x + target / x) * half
        return QuadExtApprox(p, N, self.kind, self.u, self.val // 2, x.a, x.b)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, PadicApprox)):
            other = self._coerce(other)
        if not isinstance(other, QuadExtApprox):
            return NotImplemented
        if (self.p, self.kind, self.u) != (other.p, other.kind, other.u):
            return False
        if self.zero or other.zero:
            return self.zero and other.zero
        if self.val != other.val:
            return False
        mod = self.p ** min(self.N, other.N)
        return (self.a - other.a) % mod == 0 and (self.b - other.b) % mod == 0

    def __hash__(self):
        return hash((self.p, self.kind, self.u, self.val, self.zero))

    def __repr__(self):
        if self.zero:
            return f"O({self.p}^{self.val})"
        return f"{self.p}^{self.val}*({self.a} + {self.b}*w) + O({self.p}^{self.absprec})"
