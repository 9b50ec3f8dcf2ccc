"""q-expansions, obstruction kernels, U_{p^2} and Weil representations."""
from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .qlattice import chi4, short_vectors


class NonUnitGaussSum(ArithmeticError):
    pass


# scalar series ----------------------------------------------------------------

@dataclass(frozen=True)
class QSeries:
    """sum a(n) q^n for 0 <= n <= order, exact rational coefficients."""

    coeffs: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        if n > self.order:
            raise IndexError(f"coefficient {n} beyond truncation {self.order}")
        return self.coeffs[n] if n >= 0 else Fraction(0)

    def __add__(self, other: QSeries) -> QSeries:
        M = min(self.order, other.order)
        return QSeries([self[n] + other[n] for n in range(M + 1)])

    def __sub__(self, other: QSeries) -> QSeries:
        return self + other.scale(-1)

    def scale(self, c) -> QSeries:
        return QSeries([c * a for a in self.coeffs], self.name)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        M = min(self.order, other.order)
        out = [Fraction(0)] * (M + 1)
        for i, a in enumerate(self.coeffs[: M + 1]):
            if a:
                for j in range(M + 1 - i):
                    if other.coeffs[j]:
                        out[i + j] += a * other.coeffs[j]
        return QSeries(out)

    __rmul__ = __mul__

    def substitute_power(self, k: int, order: int | None = None) -> QSeries:
        """f(q^k), truncated at ``order`` (default: the same order)."""
        M = self.order if order is None else order
        if M > k * self.order:
            raise ValueError("not enough coefficients for the substitution")
        out = [Fraction(0)] * (M + 1)
        for n in range(0, M // k + 1):
            out[n * k] = self[n]
        return QSeries(out, f"{self.name}(q^{k})")

    def named(self, name: str) -> QSeries:
        return QSeries(self.coeffs, name)

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "coeffs": [[c.numerator, c.denominator] for c in self.coeffs]})

    @classmethod
    def from_json(cls, text: str) -> QSeries:
        d = json.loads(text)
        return cls([Fraction(n, m) for n, m in d["coeffs"]], d.get("name", ""))


def theta_series(gram, M: int, name: str = "theta") -> QSeries:
    """Representation numbers of q(v) = v^T gram v / 2 for a positive definite lattice."""
    counts = [0] * (M + 1)
    counts[0] = 1
    for _, q in short_vectors(gram, M, exact=False):
        if q.denominator == 1 and q <= M:
            counts[int(q)] += 1
    return QSeries(counts, name)


def unary_theta(M: int) -> QSeries:
    out = [0] * (M + 1)
    n = 0
    while n * n <= M:
        out[n * n] += 1 if n == 0 else 2
        n += 1
    return QSeries(out, "theta")


def divisor_sum(n: int, f) -> int:
    total = 0
    for t in range(1, math.isqrt(n) + 1):
        if n % t == 0:
            total += f(t)
            if t * t != n:
                total += f(n // t)
    return total


def eisenstein_E1_chi4(M: int) -> QSeries:
    return QSeries([Fraction(1, 4)] + [divisor_sum(n, chi4) for n in range(1, M + 1)], "E1")


def weight_three_halves_g(M: int) -> QSeries:
    """theta * E1; its coefficient b(d) is the degree count of the (2,1) divisors."""
    return (unary_theta(M) * eisenstein_E1_chi4(M)).named("g")


def four_squares_b(n: int) -> int:
    if n < 1:
        raise ValueError("n >= 1")
    return divisor_sum(n, lambda t: t if t % 4 else 0)


def four_squares_series(M: int) -> QSeries:
    """1/8 + sum b(n) q^n, the weight-two Eisenstein series of level 4."""
    return QSeries([Fraction(1, 8)] + [four_squares_b(n) for n in range(1, M + 1)], "E2_4")


def eta_product_g20(M: int) -> QSeries:
    """q prod (1 - q^{2n})^2 (1 - q^{10n})^2."""
    poly = [0] * (M + 1)
    if M >= 1:
        poly[1] = 1
    for step in (2, 10):
        for n in range(step, M + 1, step):
            for _ in range(2):
                for i in range(M, n - 1, -1):
                    poly[i] -= poly[i - n]
    return QSeries(poly, "eta(2z)^2 eta(10z)^2")


def ternary_theta(M: int) -> QSeries:
    """theta(q)^3: representation numbers of x^2 + y^2 + z^2."""
    t = unary_theta(M)
    return (t * t * t).named("theta^3")


def twisted_series(f: QSeries, p: int) -> QSeries:
    """sum (n/p) a(n) q^n."""
    out = [Fraction(0)] * (f.order + 1)
    for n in range(1, f.order + 1):
        r = pow(n, (p - 1) // 2, p)
        leg = 0 if n % p == 0 else (1 if r == 1 else -1)
        out[n] = leg * f[n]
    return QSeries(out, f"{f.name} twisted by (./{p})")


def obstruction_basis(model: str, p: int, M: int):
    """The basis forms whose coefficients obstruct convergence for each model."""
    if model == "sig21":
        g = weight_three_halves_g(M * p)
        return [QSeries(g.coeffs[: M + 1], "g(q)"),
                g.substitute_power(p, M).named(f"g(q^{p})")]
    if model == "sig31-bianchi":
        return [four_squares_series(M), eta_product_g20(M).named("g20")]
    if model == "definite3":
        t = ternary_theta(M)
        return [t, twisted_series(t, p)]
    raise ValueError(f"unknown model {model!r}")


# integer kernels ----------------------------------------------------------------

def _integer_matrix(rows):
    """Clear denominators row by row."""
    out = []
    for r in rows:
        den = 1
        for x in r:
            den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
        out.append([int(Fraction(x) * den) for x in r])
    return out


def integer_kernel(rows, n: int):
    """Basis of {c in Z^n : rows . c = 0} from a unimodular column reduction.

    Column operations bring the matrix to echelon form A U = [H | 0]; the
    columns of U beyond the rank span the kernel and the span is saturated.
    """
    A = _integer_matrix(rows)
    m = len(A)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    cols = [[A[i][j] for i in range(m)] + [U[k][j] for k in range(n)] for j in range(n)]
    rank = 0
    for i in range(m):
        # Euclid across columns rank.. on row i
        while True:
            nz = [j for j in range(rank, n) if cols[j][i]]
            if not nz:
                break
            piv = min(nz, key=lambda j: abs(cols[j][i]))
            cols[rank], cols[piv] = cols[piv], cols[rank]
            done = True
            for j in range(rank + 1, n):
                if cols[j][i]:
                    q = cols[j][i] // cols[rank][i]
                    cols[j] = [a - q * b for a, b in zip(cols[j], cols[rank])]
                    if cols[j][i]:
                        done = False
            if done:
                break
        if any(cols[j][i] for j in range(rank, n)) or (rank < n and cols[rank][i]):
            rank += 1
        if rank == n:
            break
    basis = [c[m:] for c in cols[rank:]]
    for b in basis:
        assert all(sum(r[k] * b[k] for k in range(n)) == 0 for r in A)
    return basis


@dataclass
class ObstructionSystem:
    indices: tuple
    basis: list
    matrix: list
    kernel: list = field(default_factory=list)

    def functional(self, form_index: int, c) -> Fraction:
        return sum(Fraction(ci) * self.matrix[form_index][k] for k, ci in enumerate(c))

    def certify(self, c):
        """List of (form name, value) for every basis form that c does not annihilate."""
        if len(c) != len(self.indices):
            raise ValueError("weight vector length does not match the indices")
        out = []
        for i, f in enumerate(self.basis):
            val = self.functional(i, c)
            if val:
                out.append((f.name or f"form {i}", val))
        return out

    def describe_violation(self, c) -> str:
        parts = []
        for name, val in self.certify(c):
            terms = " + ".join(f"{ci}*a_{m}" for ci, m in zip(c, self.indices) if ci)
            parts.append(f"{terms} ({name}) = {val}")
        return "; ".join(parts)


def obstruction_kernel(basis, indices, reduce: bool = True) -> ObstructionSystem:
    """Integer combinations of the coefficients at ``indices`` killed by every basis form."""
    indices = tuple(indices)
    mat = [[f[m] for m in indices] for f in basis]
    n = len(indices)
    if not mat:
        kernel = [[int(i == j) for j in range(n)] for i in range(n)]
    else:
        kernel = integer_kernel(mat, n)
    if kernel and reduce:
        from .recognize import lll_reduce
        kernel = [list(map(int, r)) for r in lll_reduce(kernel)]
        kernel = [_sign_normalize(r) for r in kernel]
    return ObstructionSystem(indices, list(basis), mat, kernel)


def _sign_normalize(v):
    first = next((x for x in v if x), 0)
    return [-x for x in v] if first < 0 else list(v)


def in_lattice_span(kernel, c) -> bool:
    """Whether the integer vector c is an integer combination of the kernel rows."""
    if not kernel:
        return not any(c)
    rows = [list(r) for r in kernel]
    # c in span over Z iff appending c does not change the rank and the HNF agrees
    from .qlattice import hermite_rows
    h1 = hermite_rows(rows)
    h2 = hermite_rows(rows + [list(c)])
    return h1 == h2


# vector-valued series -----------------------------------------------------------

@dataclass(frozen=True)
class FiniteQuadModule:
    """Abelian group prod Z/orders[i] with q(x) = x^T Q x mod 1."""

    orders: tuple
    Q: tuple
    label: str = ""

    def __post_init__(self):
        Q = tuple(tuple(Fraction(x) for x in row) for row in self.Q)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "orders", tuple(int(n) for n in self.orders))
        r = len(self.orders)
        for i in range(r):
            n = self.orders[i]
            if (n * n * Q[i][i]).denominator != 1:
                raise ValueError("q not well defined on the cyclic factor")
            for j in range(r):
                if (2 * n * Q[i][j]).denominator != 1:
                    raise ValueError("bilinear form not well defined")
        if not self.is_nondegenerate():
            raise ValueError("bilinear form is degenerate")

    @classmethod
    def cyclic(cls, n: int, a) -> FiniteQuadModule:
        return cls((n,), ((Fraction(a),),), f"Z/{n}")

    @classmethod
    def direct_sum(cls, *mods: FiniteQuadModule) -> FiniteQuadModule:
        orders = sum((m.orders for m in mods), ())
        r = len(orders)
        Q = [[Fraction(0)] * r for _ in range(r)]
        off = 0
        for m in mods:
            k = len(m.orders)
            for i in range(k):
                for j in range(k):
                    Q[off + i][off + j] = m.Q[i][j]
            off += k
        return cls(orders, Q, "+".join(m.label for m in mods))

    @classmethod
    def from_gram(cls, gram) -> FiniteQuadModule:
        """Discriminant module L'/L of an even lattice with Gram matrix ``gram``."""
        G = [[int(x) for x in row] for row in gram]
        n = len(G)
        D, U = _smith_left(G)
        Ginv = _rational_inverse(G)
        keep = [i for i in range(n) if abs(D[i]) != 1]
        cols = [[U[r][i] for r in range(n)] for i in keep]
        Q = [[sum(Fraction(a[r]) * Ginv[r][s] * b[s] for r in range(n) for s in range(n)) / 2
              for b in cols] for a in cols]
        return cls(tuple(abs(D[i]) for i in keep), Q, "disc")

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    def elements(self):
        return list(itertools.product(*(range(n) for n in self.orders)))

    def q(self, x) -> Fraction:
        r = len(x)
        v = sum(self.Q[i][j] * x[i] * x[j] for i in range(r) for j in range(r))
        return v - math.floor(v)

    def bilinear(self, x, y) -> Fraction:
        r = len(x)
        v = sum(2 * self.Q[i][j] * x[i] * y[j] for i in range(r) for j in range(r))
        return v - math.floor(v)

    def scale(self, x, k: int):
        return tuple((k * a) % n for a, n in zip(x, self.orders))

    def level(self) -> int:
        den = 1
        for x in self.elements():
            d = self.q(x).denominator
            den = den * d // math.gcd(den, d)
        return den

    def is_nondegenerate(self) -> bool:
        els = self.elements()
        for x in els:
            if any(x) and all(self.bilinear(x, y) == 0 for y in els):
                return False
        return True


def _rational_inverse(G):
    n = len(G)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(G)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c])
        a[c], a[piv] = a[piv], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


def _smith_left(G):
    """Diagonal D and unimodular U with Z^n / G Z^n = sum Z/D_i generated by the columns of U."""
    n = len(G)
    A = [row[:] for row in G]
    Uinv = [[int(i == j) for j in range(n)] for i in range(n)]  # row ops on G, inverted

    def row_op(i, j, q):  # row_i -= q row_j
        A[i] = [a - q * b for a, b in zip(A[i], A[j])]
        for r in range(n):  # Uinv tracks inverse transform: columns
            Uinv[r][j] += q * Uinv[r][i]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        for r in range(n):
            Uinv[r][i], Uinv[r][j] = Uinv[r][j], Uinv[r][i]

    def col_op(i, j, q):  # col_i -= q col_j
        for r in range(n):
            A[r][i] -= q * A[r][j]

    def col_swap(i, j):
        for r in range(n):
            A[r][i], A[r][j] = A[r][j], A[r][i]

    for t in range(n):
        while True:
            entries = [(abs(A[i][j]), i, j) for i in range(t, n) for j in range(t, n) if A[i][j]]
            if not entries:
                break
            _, i, j = min(entries)
            row_swap(t, i)
            col_swap(t, j)
            changed = False
            for i in range(t + 1, n):
                q = A[i][t] // A[t][t]
                if q:
                    row_op(i, t, q)
                changed |= A[i][t] != 0
            for j in range(t + 1, n):
                q = A[t][j] // A[t][t]
                if q:
                    col_op(j, t, q)
                changed |= A[t][j] != 0
            if changed:
                continue
            bad = [(i, j) for i in range(t + 1, n) for j in range(t + 1, n) if A[i][j] % A[t][t]]
            if bad:
                i, _ = bad[0]
                A[t] = [a + b for a, b in zip(A[t], A[i])]
                for r in range(n):
                    Uinv[r][i] -= Uinv[r][t]
                continue
            break
    return [A[i][i] for i in range(n)], Uinv


@dataclass
class VVSeries:
    """Coefficients c(m, x) for x in a finite quadratic module."""

    module: FiniteQuadModule
    coeffs: dict
    level_one: bool = False

    def __post_init__(self):
        self.coeffs = {(Fraction(m), tuple(x)): Fraction(c) for (m, x), c in self.coeffs.items() if c}
        if self.level_one:
            for (m, x) in self.coeffs:
                if (m - self.module.q(x)).denominator != 1:
                    raise ValueError(f"coefficient at ({m}, {x}) violates m = q(x) mod 1")

    def __getitem__(self, key) -> Fraction:
        m, x = key
        return self.coeffs.get((Fraction(m), tuple(x)), Fraction(0))


def u_p2(f: VVSeries, p: int) -> VVSeries:
    """(U f)(m, x) = f(p^2 m, p x)."""
    D = f.module
    if math.gcd(p, D.level()) != 1 and D.size > 1:
        raise ValueError("p must not divide the level")
    pinv = pow(p, -1, math.lcm(*D.orders)) if D.orders else 1
    out = {}
    for (m, x), c in f.coeffs.items():
        m2, x2 = m / (p * p), D.scale(x, pinv)
        # only keys on the support m = q(x) mod 1 are images of (p^2 m, p x)
        if (m2 - D.q(x2)).denominator == 1:
            out[(m2, x2)] = c
    return VVSeries(D, out, f.level_one)


def lattice_theta_vv(gram, M: int) -> VVSeries:
    """c(m, beta) = #{v in beta + L : q(v) = m} for a positive definite even lattice, m <= M."""
    D = FiniteQuadModule.from_gram(gram)
    G = [[int(x) for x in row] for row in gram]
    n = len(G)
    Dg, U = _smith_left(G)
    keep = [i for i in range(n) if abs(Dg[i]) != 1]
    Ginv = _rational_inverse(G)
    # coordinates of y in Z^n / G Z^n: solve U z = y, read z mod D
    Uinv = _rational_inverse(U)
    coeffs = {}
    R = math.isqrt(int(4 * M * max(abs(x) for row in Ginv for x in row) * n + 4)) + 2
    for y in itertools.product(range(-R, R + 1), repeat=n):
        v = [sum(Ginv[r][s] * y[s] for s in range(n)) for r in range(n)]
        qv = sum(Fraction(y[r]) * v[r] for r in range(n)) / 2
        if qv > M:
            continue
        z = [sum(Uinv[r][s] * y[s] for s in range(n)) for r in range(n)]
        x = tuple(int(z[i]) % abs(Dg[i]) for i in keep)
        key = (qv, x)
        coeffs[key] = coeffs.get(key, 0) + 1
    return VVSeries(D, coeffs, level_one=True)


def weil_rep(D: FiniteQuadModule):
    """rho(T), rho(S) as complex matrices indexed by D.elements()."""
    els = D.elements()
    size = len(els)
    sig = milgram_signature(D)
    sigma_w = cmath.exp(-2j * math.pi * sig / 8)
    T = np.diag([cmath.exp(2j * math.pi * float(D.q(x))) for x in els])
    S = np.empty((size, size), dtype=complex)
    scale = sigma_w / math.sqrt(size)
    for a, y in enumerate(els):
        for b, x in enumerate(els):
            S[a, b] = scale * cmath.exp(-2j * math.pi * float(D.bilinear(x, y)))
    return T, S


def gauss_sum(D: FiniteQuadModule) -> complex:
    return sum(cmath.exp(2j * math.pi * float(D.q(x))) for x in D.elements())


def milgram_signature(D: FiniteQuadModule, tol: float = 1e-9) -> int:
    g = gauss_sum(D) / math.sqrt(D.size)
    if abs(abs(g) - 1) > tol:
        raise NonUnitGaussSum(f"|normalized Gauss sum| = {abs(g)}")
    k = round(cmath.phase(g) / (2 * math.pi / 8)) % 8
    if abs(g - cmath.exp(2j * math.pi * k / 8)) > 1e-6:
        raise NonUnitGaussSum("Gauss sum is not an eighth root of unity")
    return k


def random_module(rng, max_order: int = 25) -> FiniteQuadModule:
    """Direct sum of random nondegenerate cyclic pieces, total order <= max_order."""
    pieces = []
    order = 1
    while True:
        room = max_order // order
        if room < 2:
            break
        n = int(rng.integers(2, room + 1))
        if n % 2:
            a = int(rng.integers(1, n))
            while math.gcd(a, n) != 1:
                a = int(rng.integers(1, n))
            pieces.append(FiniteQuadModule.cyclic(n, Fraction(a, n)))
        else:
            a = int(rng.integers(0, n)) * 2 + 1
            while math.gcd(a, n) != 1:
                a = int(rng.integers(0, n)) * 2 + 1
            pieces.append(FiniteQuadModule.cyclic(n, Fraction(a, 2 * n)))
        order *= n
        if rng.random() < 0.5:
            break
    if not pieces:
        pieces.append(FiniteQuadModule.cyclic(3, Fraction(1, 3)))
    return FiniteQuadModule.direct_sum(*pieces)
