"""Matching families: vectors u_1..u_n in Z_m^h with <u_i, u_i> = 0 and
<u_i, u_j> in S (mod m) for i != j.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidModulus
from .modulus import crt, profile


@dataclass(frozen=True)
class MatchingFamily:
    m: int
    h: int
    vectors: tuple
    target_set: tuple

    @property
    def n(self):
        return len(self.vectors)

    def gram(self):
        m = self.m
        return [[sum(a * b for a, b in zip(u, v)) % m for v in self.vectors] for u in self.vectors]

    def to_json(self):
        return {
            "m": self.m,
            "h": self.h,
            "n": self.n,
            "set": list(self.target_set),
            "vectors": [list(v) for v in self.vectors],
        }

    @classmethod
    def from_json(cls, d):
        vecs = tuple(tuple(int(x) for x in v) for v in d["vectors"])
        h = int(d["h"])
        if any(len(v) != h for v in vecs):
            raise ValueError("vector length differs from h")
        return cls(int(d["m"]), h, vecs, tuple(int(s) for s in d["set"]))


def make_family(m, vectors, target_set=None):
    vectors = tuple(tuple(int(x) % m for x in v) for v in vectors)
    h = len(vectors[0]) if vectors else 0
    if target_set is None:
        target_set = profile(m).canonical
    return MatchingFamily(m, h, vectors, tuple(target_set))


class Check(NamedTuple):
    ok: bool
    violation: tuple = None  # (i, j, value), 1-based; i == j for isotropy

    def __bool__(self):
        return self.ok


def verify_matching(f):
    m = f.m
    S = set(f.target_set)
    vecs = f.vectors
    for i, u in enumerate(vecs):
        if len(u) != f.h:
            return Check(False, (i + 1, i + 1, None))
        val = sum(a * a for a in u) % m
        if val != 0:
            return Check(False, (i + 1, i + 1, val))
    for i, u in enumerate(vecs):
        for j in range(i + 1, len(vecs)):
            val = sum(a * b for a, b in zip(u, vecs[j])) % m
            if val not in S:
                return Check(False, (i + 1, j + 1, val))
    return Check(True)


# ---------- square roots and two squares ----------

def legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod(a, p):
    """A square root of a quadratic residue a modulo an odd prime p."""
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    mm, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (mm - i - 1), p)
        mm, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def sum_of_two_squares(d, p):
    """(x, y) with x^2 + y^2 = d (mod p), x the least choice that works."""
    d %= p
    for x in range(p):
        rest = (d - x * x) % p
        if legendre(rest, p) >= 0:
            y = sqrt_mod(rest, p)
            return x, min(y, p - y)
    raise ValueError("unreachable for an odd prime")


# ---------- Gram realization ----------

def _diagonalize(M, p):
    """L, D with L M L^T = diag(D) over F_p (M symmetric)."""
    n = len(M)
    A = [row[:] for row in M]
    L = [[int(i == j) for j in range(n)] for i in range(n)]

    def add_into(k, j, f):
        # row/col k += f * row/col j
        for c in range(n):
            A[k][c] = (A[k][c] + f * A[j][c]) % p
        for r in range(n):
            A[r][k] = (A[r][k] + f * A[r][j]) % p
        for c in range(n):
            L[k][c] = (L[k][c] + f * L[j][c]) % p

    for k in range(n):
        if A[k][k] == 0:
            j = next((j for j in range(k + 1, n) if A[k][j]), None)
            if j is None:
                continue
            # k += f*j makes the pivot f^2 A[j][j] + 2f A[k][j]; f = 1 or -1
            # cannot both give zero since p is odd
            f = 1 if (2 * A[k][j] + A[j][j]) % p else p - 1
            add_into(k, j, f)
        piv_inv = pow(A[k][k], -1, p)
        for i in range(k + 1, n):
            if A[i][k]:
                add_into(i, k, (-A[i][k] * piv_inv) % p)
    D = [A[i][i] for i in range(n)]
    return L, D


def _inverse_mod(L, p):
    n = len(L)
    aug = [row[:] + [int(i == j) for j in range(n)] for i, row in enumerate(L)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] % p)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], -1, p)
        aug[col] = [x * inv % p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [(x - f * y) % p for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def realize_gram(M, p):
    """Rows U (n x h, h <= 2n) over F_p with U U^T = M."""
    n = len(M)
    L, D = _diagonalize(M, p)
    Linv = _inverse_mod(L, p)
    cols = []  # columns of E, each a sparse (row k, value)
    for k, d in enumerate(D):
        x, y = sum_of_two_squares(d, p)
        for val in (x, y):
            if val:
                cols.append((k, val))
    # U = Linv * E
    return [[Linv[i][k] * val % p for k, val in cols] for i in range(n)]


def gram_family(m, n):
    """n vectors whose Gram matrix is J - I mod m (cross products all 1)."""
    prof = profile(m)
    if prof.r != 2:
        raise InvalidModulus(f"m = {m} has {prof.r} prime factors, expected 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    M = [[int(i != j) for j in range(n)] for i in range(n)]
    parts = [realize_gram([[x % p for x in row] for row in M], p) for p in prof.primes]
    h = max(1, max(len(U[0]) if U and U[0] else 0 for U in parts))
    padded = [[row + [0] * (h - len(row)) for row in U] for U in parts]
    primes = list(prof.primes)
    vectors = [
        [crt([padded[0][i][c], padded[1][i][c]], primes) for c in range(h)]
        for i in range(n)
    ]
    return make_family(m, vectors, prof.canonical)


# ---------- randomized search ----------

def greedy_search(m, h, target_n, seed=0, budget=10**6, batch=4096):
    """Sample uniform vectors, keeping those that extend the family.

    `budget` caps the number of sampled vectors.
    """
    if h < 2:
        raise ValueError("h must be >= 2")
    prof = profile(m)
    S = np.array(sorted(prof.canonical), dtype=np.int64)
    kept = []
    if target_n <= 0:
        return make_family(m, [], prof.canonical)
    if m >= 2**30:
        raise ValueError("greedy search needs m < 2^30")
    rng = np.random.default_rng(seed)
    drawn = 0
    while drawn < budget and len(kept) < target_n:
        size = min(batch, budget - drawn)
        cand = rng.integers(0, m, size=(size, h), dtype=np.int64)
        drawn += size
        iso = (cand * cand).sum(axis=1) % m == 0
        iso &= cand.any(axis=1)
        for v in cand[iso]:
            if kept:
                K = np.array(kept, dtype=np.int64)
                cross = (K * v).sum(axis=1) % m
                if not np.isin(cross, S).all():
                    continue
            kept.append([int(x) for x in v])
            if len(kept) >= target_n:
                break
    return make_family(m, kept, prof.canonical)
