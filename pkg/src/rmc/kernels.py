"""Vectorized enumeration and product kernels.

Level sets of the hyperbolic models are produced as a join between the
definite part (b for the (2,1) model, (x, y) for the Bianchi model) and the
pairs (t, k) with t odd and t*k = n, giving vectors with <v, w_plus> = t > 0
and <v, w_minus> = -k.  Only t odd is needed since chi4(t) = 0 otherwise.

Products are taken in Z/p^M[omega] on int64 arrays when the modulus allows,
otherwise on object arrays of Python integers.
"""
from __future__ import annotations

import math
import os

import numpy as np

# largest modulus for which (a*c + u*b*d) stays inside int64
_INT64_LIMIT = 2**62


def threads() -> int:
    try:
        return max(1, int(os.environ.get("RMC_THREADS", "1")))
    except ValueError:
        return 1


def int_dtype(mod: int, terms: int = 1, u: int = 1):
    """int64 if sums of ``terms`` products of residues mod ``mod`` fit, else object."""
    if mod * mod * (terms + u) < _INT64_LIMIT:
        return np.int64
    return object


def chi4_array(t: np.ndarray) -> np.ndarray:
    r = np.mod(t, 4)
    return np.where(r == 1, 1, np.where(r == 3, -1, 0)).astype(np.int64)


# definite parts -------------------------------------------------------------

def _definite_table(tag: str, N: int):
    """Points of the definite part with norm s < N... grouped by s (CSR)."""
    if tag == "sig21":
        r = math.isqrt(N)
        pts = np.arange(-r, r + 1, dtype=np.int64).reshape(-1, 1)
        s = pts[:, 0] ** 2
    elif tag == "sig31-bianchi":
        r = math.isqrt(N)
        xs = np.arange(-r, r + 1, dtype=np.int64)
        chunks = []
        for x in xs:
            ymax = math.isqrt(max(N - int(x) * int(x), 0))
            ys = np.arange(-ymax, ymax + 1, dtype=np.int64)
            chunks.append(np.stack([np.full_like(ys, x), ys], axis=1))
        pts = np.concatenate(chunks)
        s = pts[:, 0] ** 2 + pts[:, 1] ** 2
    else:
        raise ValueError(f"no fast enumerator for model {tag!r}")
    keep = s < N
    pts, s = pts[keep], s[keep]
    order = np.argsort(s, kind="stable")
    pts, s = pts[order], s[order]
    counts = np.bincount(s, minlength=N)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    return pts, counts, offsets


def _odd_pairs(N: int, max_len: int):
    """Yield arrays (t, k) with t odd, k >= 1 and t*k <= N, in bounded chunks."""
    S = math.isqrt(N)
    buf_t, buf_k, size = [], [], 0
    for t in range(1, S + 1, 2):
        for lo in range(1, N // t + 1, max_len):
            k = np.arange(lo, min(lo + max_len, N // t + 1), dtype=np.int64)
            buf_t.append(np.full_like(k, t))
            buf_k.append(k)
            size += len(k)
            if size >= max_len:
                yield np.concatenate(buf_t), np.concatenate(buf_k)
                buf_t, buf_k, size = [], [], 0
    # t > S: then k <= N // (S + 1)
    for k in range(1, N // (S + 1) + 1):
        lo = S + 1 if (S + 1) % 2 else S + 2
        hi = N // k
        if lo > hi:
            continue
        t = np.arange(lo, hi + 1, 2, dtype=np.int64)
        buf_t.append(t)
        buf_k.append(np.full_like(t, k))
        size += len(t)
        if size >= max_len:
            yield np.concatenate(buf_t), np.concatenate(buf_k)
            buf_t, buf_k, size = [], [], 0
    if buf_t:
        yield np.concatenate(buf_t), np.concatenate(buf_k)


def hyperbolic_level_chunks(tag: str, N: int, p: int, primitive: bool, chunk_rows: int = 4_000_000):
    """Yield (V, t) arrays: pair-reduced vectors of norm N crossing (0, oo) with t odd.

    V has the model's coordinate layout; t = <v, w_plus> > 0.
    """
    if tag == "sig21":
        yield from _sig21_chunks(N, p, primitive, chunk_rows)
        return
    pts, counts, offsets = _definite_table(tag, N)
    for t, k in _odd_pairs(N, max(chunk_rows // 8, 1024)):
        s = N - t * k
        ok = s >= 0
        t, k, s = t[ok], k[ok], s[ok]
        c = counts[s]
        ok = c > 0
        t, k, s, c = t[ok], k[ok], s[ok], c[ok]
        if len(t) == 0:
            continue
        # split further so that each join stays below chunk_rows
        cum = np.cumsum(c)
        start = 0
        while start < len(t):
            base = cum[start - 1] if start else 0
            stop = int(np.searchsorted(cum, base + chunk_rows, side="right"))
            stop = max(stop, start + 1)
            sl = slice(start, stop)
            yield _join(tag, pts, offsets, t[sl], k[sl], s[sl], c[sl], p, primitive)
            start = stop


def _sig21_chunks(N: int, p: int, primitive: bool, chunk_rows: int):
    """(2,1) model: for each divisor d <= sqrt(N - b^2), emit (t, k) = (d, n/d) and (n/d, d)."""
    r = math.isqrt(N)
    b = np.arange(-r, r + 1, dtype=np.int64)
    n = N - b * b
    b, n = b[n > 0], n[n > 0]
    rows = []
    size = 0
    for d in range(1, math.isqrt(N) + 1):
        sel = (n % d == 0) & (n >= d * d)
        if not sel.any():
            continue
        bb, q = b[sel], n[sel] // d
        if d % 2:
            rows.append(np.stack([np.full_like(bb, d), bb, -q], axis=1))
        other = (q % 2 == 1) & (q != d)
        if other.any():
            rows.append(np.stack([q[other], bb[other], np.full(int(other.sum()), -d, dtype=np.int64)], axis=1))
        size += len(bb)
        if size >= chunk_rows:
            yield _finish(np.concatenate(rows), p, primitive)
            rows, size = [], 0
    if rows:
        yield _finish(np.concatenate(rows), p, primitive)


def _finish(V, p, primitive):
    if primitive:
        V = V[np.any(V % p != 0, axis=1)]
    return V, V[:, 0].copy()


def _join(tag, pts, offsets, t, k, s, c, p, primitive):
    total = int(c.sum())
    rep = np.repeat(np.arange(len(t)), c)
    first = np.repeat(offsets[s], c)
    within = np.arange(total) - np.repeat(np.cumsum(c) - c, c)
    d = pts[first + within]
    tt, kk = t[rep], k[rep]
    if tag == "sig21":
        V = np.stack([tt, d[:, 0], -kk], axis=1)
    else:
        V = np.stack([d[:, 0], d[:, 1], -kk, tt], axis=1)
    if primitive:
        keep = np.any(V % p != 0, axis=1)
        V, tt = V[keep], tt[keep]
    return V, tt


def sum_of_squares_vectors(n_vars: int, N: int) -> np.ndarray:
    """All integer vectors in Z^n_vars (n_vars = 3) with sum of squares N."""
    if n_vars != 3:
        raise ValueError("only ternary sums of squares are vectorized")
    r = math.isqrt(N)
    out = []
    for x in range(-r, r + 1):
        rest = N - x * x
        ry = math.isqrt(rest)
        y = np.arange(-ry, ry + 1, dtype=np.int64)
        z2 = rest - y * y
        z = np.floor(np.sqrt(z2.astype(np.float64))).astype(np.int64)
        z += ((z + 1) ** 2 <= z2).astype(np.int64)
        z -= (z * z > z2).astype(np.int64)
        hit = z * z == z2
        y, z = y[hit], z[hit]
        for sz in (z, -z[z > 0]):
            yy = y if sz is z else y[z > 0]
            out.append(np.stack([np.full_like(yy, x), yy, sz], axis=1))
    V = np.concatenate(out) if out else np.zeros((0, 3), dtype=np.int64)
    order = np.lexsort(V.T[::-1])
    return V[order]


# arithmetic in Z/p^M[omega] ---------------------------------------------------

def linear_form(V, gre, gom, mod: int):
    """Values sum_i V[:, i] * (gre[i] + gom[i] w) modulo ``mod``."""
    n = V.shape[1]
    dtype = int_dtype(mod, n)
    Vm = np.mod(V, mod).astype(dtype) if dtype is object else np.mod(V, mod)
    A = np.zeros(len(V), dtype=dtype)
    B = np.zeros(len(V), dtype=dtype)
    for i in range(n):
        if gre[i]:
            A = A + Vm[:, i] * gre[i]
        if gom[i]:
            B = B + Vm[:, i] * gom[i]
    return np.mod(A, mod), np.mod(B, mod)


def strip_valuation(A, B, p: int, limit: int):
    """Divide out the common p-power of (A, B).  Returns (A, B, v, overflow mask)."""
    v = np.zeros(len(A), dtype=np.int64)
    A = A.copy()
    B = B.copy()
    for _ in range(limit):
        m = (np.mod(A, p) == 0) & (np.mod(B, p) == 0)
        if not m.any():
            break
        A[m] //= p
        B[m] //= p
        v[m] += 1
    over = (np.mod(A, p) == 0) & (np.mod(B, p) == 0)
    return A, B, v, over


def tree_product(A, B, mod: int, w: int):
    """Product of the elements A + B*omega (omega^2 = w) modulo ``mod``."""
    if len(A) == 0:
        return 1, 0
    dtype = int_dtype(mod, 1, w)
    if dtype is object:
        A = A.astype(object)
        B = B.astype(object)
    else:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
    A, B = np.mod(A, mod), np.mod(B, mod)
    while len(A) > 1:
        if len(A) % 2:
            A = np.append(A, np.array([1], dtype=A.dtype))
            B = np.append(B, np.array([0], dtype=B.dtype))
        a, c = A[0::2], A[1::2]
        b, d = B[0::2], B[1::2]
        A = np.mod(np.mod(a * c, mod) + np.mod(w * np.mod(b * d, mod), mod), mod)
        B = np.mod(np.mod(a * d, mod) + np.mod(b * c, mod), mod)
    return int(A[0]), int(B[0])


def real_product(X, mod: int):
    X = np.mod(X, mod)
    return tree_product(X, np.zeros_like(X), mod, 1)[0]


def mul_pair(x, y, mod, w):
    return ((x[0] * y[0] + w * x[1] * y[1]) % mod, (x[0] * y[1] + x[1] * y[0]) % mod)


def inv_pair(x, mod, w):
    n = (x[0] * x[0] - w * x[1] * x[1]) % mod
    ni = pow(n, -1, mod)
    return (x[0] * ni % mod, -x[1] * ni % mod)


def weighted_product(A, B, e, mod, w):
    """prod (A + B w)^e for integer exponents e (units assumed)."""
    pos = e > 0
    neg = e < 0
    num = tree_product(np.repeat(A[pos], e[pos]), np.repeat(B[pos], e[pos]), mod, w)
    den = tree_product(np.repeat(A[neg], -e[neg]), np.repeat(B[neg], -e[neg]), mod, w)
    return mul_pair(num, inv_pair(den, mod, w), mod, w)


def weighted_real_product(X, e, mod):
    num = real_product(np.repeat(X[e > 0], e[e > 0]), mod)
    den = real_product(np.repeat(X[e < 0], -e[e < 0]), mod)
    return num * pow(den, -1, mod) % mod


# line bookkeeping -------------------------------------------------------------

def first_unit(C, p: int):
    """Column index and value of the first coordinate prime to p, per row."""
    nz = np.mod(C, p) != 0
    idx = np.argmax(nz, axis=1)
    if not nz[np.arange(len(C)), idx].all():
        raise ValueError("non-primitive coordinate row")
    return idx, C[np.arange(len(C)), idx]


def line_keys(C, lam, p: int, j: int):
    """Integer keys of the lines of (C mod p^j) after scaling by lam^-1."""
    mod = p**j
    n = C.shape[1]
    if mod**n >= 2**62:
        # exact Python-int keys so that keys from different chunks stay comparable
        li = np.array([pow(int(x), -1, mod) for x in lam], dtype=object)
        key = np.zeros(len(C), dtype=object)
        for i in range(n):
            key = key * mod + np.mod(np.mod(C[:, i].astype(object), mod) * li, mod)
        return key
    inv = _inverse_table(p, j)
    li = inv[np.mod(lam, mod).astype(np.int64)]
    key = np.zeros(len(C), dtype=np.int64)
    for i in range(n):
        key = key * mod + np.mod(np.mod(C[:, i], mod).astype(np.int64) * li, mod)
    return key


_INV_CACHE: dict = {}


def _inverse_table(p: int, j: int):
    key = (p, j)
    if key not in _INV_CACHE:
        mod = p**j
        table = np.zeros(mod, dtype=np.int64)
        units = np.array([x for x in range(mod) if x % p], dtype=np.int64)
        table[units] = [pow(int(x), -1, mod) for x in units]
        _INV_CACHE[key] = table
    return _INV_CACHE[key]


class LineTally:
    """Accumulates exponent sums per line key across chunks."""

    def __init__(self):
        self.keys = []
        self.sums = []

    def add(self, keys, e):
        if len(keys) == 0:
            return
        u, inv = np.unique(keys, return_inverse=True)
        self.keys.append(u)
        self.sums.append(np.bincount(inv, weights=e).astype(np.int64))
        if len(self.keys) > 16:
            self._compact()

    def _compact(self):
        k = np.concatenate(self.keys)
        s = np.concatenate(self.sums)
        u, inv = np.unique(k, return_inverse=True)
        self.keys = [u]
        self.sums = [np.bincount(inv, weights=s).astype(np.int64)]

    def nonzero(self):
        """Number of lines with nonzero exponent sum and the largest |sum|."""
        if not self.keys:
            return 0, 0
        self._compact()
        s = self.sums[0]
        bad = s != 0
        return int(bad.sum()), int(np.abs(s).max()) if len(s) else 0
