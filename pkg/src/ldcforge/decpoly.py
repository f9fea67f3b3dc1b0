"""Decoding polynomials over GF(2^t) and the three-term membership search.

A polynomial P is an S_m-decoding polynomial when P(1) = 1 and P vanishes at
gamma_m^s for every canonical residue s.  For m = pq the search looks for two
admissible cosets whose ratio values R_alpha share a Frobenius orbit; any
such collision yields a 3-term polynomial.
"""

import os
import time
from collections import defaultdict
from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import FieldElement, FieldSpec, TABLE_MAX_T, element_hex, field_create, primitive_root
from .errors import (
    BudgetExceeded,
    CertificateInconsistent,
    ForbiddenCoset,
    InternalError,
    InvalidModulus,
)
from .modulus import coset_representatives, profile

SEARCH_MAX_M = 2**37 - 1
BRUTE_MAX_M = 10**5
DEFAULT_SEARCH_BUDGET = 600.0


def default_workers():
    env = os.environ.get("LDCFORGE_THREADS")
    if env:
        return max(1, int(env))
    return 1


# ---------- polynomials ----------

@dataclass(frozen=True)
class DecodingPolynomial:
    """Sparse polynomial sum a_l X^{b_l}, evaluated at powers of `root`.

    `root` is the raw coefficient int of gamma_m, `terms` a tuple of
    (exponent, raw coefficient) with exponents increasing in [0, m).
    """

    m: int
    field: FieldSpec
    root: int
    terms: tuple

    @classmethod
    def build(cls, m, field, root, terms):
        """Merge exponents mod m and drop zero coefficients."""
        acc = defaultdict(int)
        for e, a in terms:
            acc[int(e) % m] ^= int(a)
        clean = tuple(sorted((e, a) for e, a in acc.items() if a))
        root = int(root)
        return cls(m, field, root, clean)

    @property
    def k(self):
        return len(self.terms)

    @property
    def exponents(self):
        return [e for e, _ in self.terms]

    @property
    def coefficients(self):
        return [FieldElement(self.field, a) for _, a in self.terms]

    def at_power(self, s):
        """P(gamma_m^s) as a raw field value."""
        F = self.field
        g = self.root
        val = 0
        for e, a in self.terms:
            val ^= F.mul(a, F.pow(g, e * s % self.m))
        return val

    def __call__(self, x):
        F = self.field
        c = x.coeffs if isinstance(x, FieldElement) else int(x)
        val = 0
        for e, a in self.terms:
            val ^= F.mul(a, F.pow(c, e))
        return FieldElement(F, val)

    def to_json(self):
        t = self.field.t
        return {
            "m": str(self.m),
            "field": self.field.to_json(),
            "root_hex": element_hex(self.root, t),
            "k": self.k,
            "terms": [{"exp": e, "coef_hex": element_hex(a, t)} for e, a in self.terms],
        }

    @classmethod
    def from_json(cls, d):
        F = FieldSpec.from_json(d["field"])
        terms = [(int(x["exp"]), F.from_hex(x["coef_hex"])) for x in d["terms"]]
        return cls.build(int(d["m"]), F, F.from_hex(d["root_hex"]), terms)

    def __str__(self):
        parts = []
        for e, a in reversed(self.terms):
            c = element_hex(a, self.field.t)
            parts.append(f"[{c}]" if e == 0 else f"[{c}]X^{e}")
        return " + ".join(parts) or "0"


def root_has_order(field, root, m):
    """True iff root has multiplicative order exactly m."""
    if root == 0 or field.pow(root, m) != 1:
        return False
    from .ntheory import factorize
    return all(field.pow(root, m // p) != 1 for p in factorize(m, None))


def decoding_failures(P, canonical=None):
    """Residues s (and the marker "one") where the decoding conditions fail."""
    if canonical is None:
        canonical = profile(P.m).canonical
    bad = []
    if P.at_power(0) != 1:
        bad.append("one")
    for s in canonical:
        if P.at_power(s) != 0:
            bad.append(s)
    return bad


def verify_decoding_polynomial(P, canonical=None):
    """P(1) = 1 and P(gamma_m^s) = 0 for every canonical residue s."""
    try:
        if not root_has_order(P.field, P.root, P.m):
            return False
        return not decoding_failures(P, canonical)
    except (InvalidModulus, BudgetExceeded):
        return False


def _poly_mul_linear(F, coeffs, c):
    """coeffs * (X + c), coefficient list lowest degree first."""
    out = [0] * (len(coeffs) + 1)
    for i, a in enumerate(coeffs):
        out[i + 1] ^= a
        out[i] ^= F.mul(a, c)
    return out


def lagrange_polynomial(m, field=None, root=None):
    """The interpolating polynomial of degree < 2^r through (1, 1) and the zeros.

    P(X) = prod_s (X + g^s) / prod_s (1 + g^s) over s in S_m.
    """
    prof = profile(m)
    if 2**prof.r > 64:
        raise BudgetExceeded(f"2^r = {2**prof.r} exceeds interpolation cap")
    F = field or field_create(prof.t)
    g = root if root is not None else primitive_root(F, m).coeffs
    coeffs = [1]
    denom = 1
    for s in prof.canonical:
        gs = F.pow(g, s)
        coeffs = _poly_mul_linear(F, coeffs, gs)
        denom = F.mul(denom, 1 ^ gs)
    scale = F.inv(denom)
    terms = [(e, F.mul(a, scale)) for e, a in enumerate(coeffs)]
    P = DecodingPolynomial.build(m, F, g, terms)
    if not verify_decoding_polynomial(P, prof.canonical):
        raise InternalError(f"interpolation for m = {m} failed verification")
    return P


# ---------- coset ratios ----------

def coset_ratio(prof, gamma, alpha):
    """R_alpha = (g^a + g^{a s01}) / (g^a + g^{a s10})."""
    m = prof.m
    alpha = int(alpha) % m
    if any(alpha % p == 0 for p in prof.primes):
        raise ForbiddenCoset(f"coset of {alpha} contains a multiple of a prime factor of {m}")
    F = gamma.field
    g = gamma.coeffs
    x = F.pow(g, alpha)
    num = x ^ F.pow(g, alpha * prof.s01 % m)
    den = x ^ F.pow(g, alpha * prof.s10 % m)
    if not num or not den:
        raise InternalError(f"vanishing ratio term at alpha = {alpha}")
    return FieldElement(F, F.div(num, den))


# ---------- certificates ----------

@dataclass
class M2Certificate:
    m: int
    verdict: str  # "member", "nonmember", "unknown"
    field: FieldSpec = None
    root: int = None
    alpha: int = None
    c: int = None
    beta: int = None
    d: int = None
    u: int = None
    v: int = None
    a: int = None
    b: int = None
    polynomial: DecodingPolynomial = None
    method: str = "collision"
    stats: dict = dc_field(default_factory=dict)

    @property
    def is_member(self):
        return self.verdict == "member"

    def to_json(self):
        out = {"m": str(self.m), "verdict": self.verdict, "method": self.method}
        if self.field is not None:
            out["field"] = self.field.to_json()
            out["root_hex"] = element_hex(self.root, self.field.t)
        if self.is_member:
            t = self.field.t
            out.update(
                alpha=self.alpha, c=self.c, beta=self.beta, d=self.d,
                u=self.u, v=self.v,
                a_hex=element_hex(self.a, t), b_hex=element_hex(self.b, t),
                poly=self.polynomial.to_json(),
            )
        out["stats"] = self.stats
        return out

    @classmethod
    def from_json(cls, d):
        cert = cls(int(d["m"]), d["verdict"], method=d.get("method", "collision"),
                   stats=d.get("stats", {}))
        if "field" in d:
            cert.field = FieldSpec.from_json(d["field"])
            cert.root = cert.field.from_hex(d["root_hex"])
        if cert.is_member:
            F = cert.field
            for name in ("alpha", "c", "beta", "d", "u", "v"):
                setattr(cert, name, int(d[name]))
            cert.a = F.from_hex(d["a_hex"])
            cert.b = F.from_hex(d["b_hex"])
            cert.polynomial = DecodingPolynomial.from_json(d["poly"])
        return cert


def build_three_monomial(cert):
    """Solve the 3x3 system for (a, b) and normalize X^u + aX^v + b."""
    if not cert.is_member:
        raise CertificateInconsistent("certificate is not a membership certificate")
    prof = profile(cert.m)
    m, F, g = cert.m, cert.field, cert.root
    u = pow(2, cert.c, m) * cert.alpha % m
    v = pow(2, cert.d, m) * cert.beta % m
    if u == v or 0 in (u, v):
        raise CertificateInconsistent(f"degenerate exponents u = {u}, v = {v}")
    s01, s10 = prof.s01, prof.s10
    yu, zu = F.pow(g, u * s01 % m), F.pow(g, u * s10 % m)
    yv, zv = F.pow(g, v * s01 % m), F.pow(g, v * s10 % m)
    if yv == zv:
        raise CertificateInconsistent("singular 2x2 block")
    a = F.div(yu ^ zu, yv ^ zv)
    b = yu ^ F.mul(a, yv)
    # third row, s = 1
    if F.pow(g, u) ^ F.mul(a, F.pow(g, v)) ^ b:
        raise CertificateInconsistent("row s = 1 not satisfied: determinant nonzero")
    if not a or not b:
        raise CertificateInconsistent("a or b vanishes")
    norm = 1 ^ a ^ b
    if not norm:
        raise CertificateInconsistent("1 + a + b = 0")
    inv = F.inv(norm)
    P = DecodingPolynomial.build(m, F, g, [(u, inv), (v, F.mul(a, inv)), (0, F.mul(b, inv))])
    if P.k != 3 or not verify_decoding_polynomial(P, prof.canonical):
        raise CertificateInconsistent("rebuilt polynomial fails verification")
    cert.u, cert.v, cert.a, cert.b = u, v, a, b
    cert.polynomial = P
    return P


# ---------- collision search ----------

def _orbit_data_tables(F, g, m, s01, s10, alphas):
    """(key, jmin, orbit size) arrays for each alpha using log tables."""
    T = F.tables
    q1 = T.q1
    lg = int(T.log[g])
    al = np.asarray(alphas, dtype=np.int64)
    l1 = al * lg % q1
    l2 = (al * s01 % m) * lg % q1
    l3 = (al * s10 % m) * lg % q1
    x = T.exp[l1]
    num = x ^ T.exp[l2]
    den = x ^ T.exp[l3]
    if (num == 0).any() or (den == 0).any():
        raise InternalError("vanishing ratio term in admissible coset")
    lr = (T.log[num] - T.log[den]) % q1
    t = F.t
    key = T.exp[lr].copy()
    jmin = np.zeros(len(al), dtype=np.int64)
    orbit = np.full(len(al), t, dtype=np.int64)
    lj = lr.copy()
    for j in range(1, t):
        lj = lj * 2 % q1
        orbit = np.where((orbit == t) & (lj == lr) & (t % j == 0), j, orbit)
        vals = T.exp[lj]
        better = (vals < key) & (j < orbit)
        key = np.where(better, vals, key)
        jmin = np.where(better, j, jmin)
    return [(int(k), int(j), int(o)) for k, j, o in zip(key, jmin, orbit)]


def _orbit_data_spread(t, modulus, g, m, s01, s10, alphas, deadline=None):
    """Same as the table path with slot-spread gmpy2 arithmetic.

    Returns None when the deadline passes.
    """
    F = field_create(t, modulus)
    E = F.spread
    G = E.to(g)
    nums, dens = [], []
    for n, a in enumerate(alphas):
        if deadline is not None and n % 64 == 0 and time.monotonic() > deadline:
            return None
        x = E.pow(G, a)
        num = x ^ E.pow(G, a * s01 % m)
        den = x ^ E.pow(G, a * s10 % m)
        if not num or not den:
            raise InternalError("vanishing ratio term in admissible coset")
        nums.append(num)
        dens.append(den)
    out = []
    for n, (num, dinv) in enumerate(zip(nums, E.batch_inv(dens))):
        if deadline is not None and n % 16 == 0 and time.monotonic() > deadline:
            return None
        r = E.mul(num, dinv)
        key, jmin, o = r, 0, t
        y = r
        for j in range(1, t):
            y = E.sqr(y)
            if y == r:
                o = j
                break
            if y < key:
                key, jmin = y, j
        out.append((E.back(key), jmin, o))
    return out


def _choose_backend(t, m):
    if t <= 16 or (t <= TABLE_MAX_T and m >= 10**5):
        return "tables"
    return "spread"


def collision_search(m, workers=None, budget=DEFAULT_SEARCH_BUDGET, backend="auto"):
    """Decide whether m = pq admits a 3-term decoding polynomial."""
    prof = profile(m)
    if prof.r != 2:
        raise InvalidModulus(f"m = {m} has {prof.r} prime factors, expected 2")
    if m > SEARCH_MAX_M:
        raise BudgetExceeded(f"collision search supports m <= {SEARCH_MAX_M}")
    start = time.monotonic()
    deadline = None if budget is None else start + budget
    t = prof.t
    F = field_create(t)
    g = primitive_root(F, m).coeffs
    s01, s10 = prof.s01, prof.s10
    alphas = [int(a) for a in coset_representatives(m, t, units_only=True)]
    if backend == "auto":
        backend = _choose_backend(t, m)
    stats = {"admissible_cosets": len(alphas), "backend": backend, "t": t}

    if backend == "tables":
        data = _orbit_data_tables(F, g, m, s01, s10, alphas)
    else:
        workers = workers or default_workers()
        if workers > 1 and len(alphas) > workers:
            from concurrent.futures import ProcessPoolExecutor
            shards = [alphas[i::workers] for i in range(workers)]
            with ProcessPoolExecutor(workers) as pool:
                futs = [pool.submit(_orbit_data_spread, t, F.modulus, g, m, s01, s10, sh, deadline)
                        for sh in shards]
                parts = [f.result() for f in futs]
            if any(p is None for p in parts):
                data = None
            else:
                data = [None] * len(alphas)
                for i, part in enumerate(parts):
                    data[i::workers] = part
        else:
            data = _orbit_data_spread(t, F.modulus, g, m, s01, s10, alphas, deadline)
        stats["workers"] = workers
    if data is None:
        stats["elapsed"] = round(time.monotonic() - start, 3)
        return M2Certificate(m, "unknown", F, g, stats=stats)

    groups = defaultdict(list)
    for a, (key, j, o) in zip(alphas, data):
        groups[key].append((a, j, o))
    stats["distinct_keys"] = len(groups)

    best = None
    for members in groups.values():
        o = members[0][2]
        for i, (a, ja, _) in enumerate(members):
            if o < t:
                cand = (a, a, 0, o)
            elif i + 1 < len(members):
                b, jb, _ = members[i + 1]
                cand = (a, b, 0, (jb - ja) % o)
            else:
                continue
            if best is None or cand < best:
                best = cand
            break  # members ascend, so later ones only give larger alpha
    stats["elapsed"] = round(time.monotonic() - start, 3)
    if best is None:
        return M2Certificate(m, "nonmember", F, g, stats=stats)

    alpha, beta, c, d = best
    gamma = FieldElement(F, g)
    ra = coset_ratio(prof, gamma, alpha)
    rb = coset_ratio(prof, gamma, beta)
    if F.frob(rb.coeffs, d) != F.frob(ra.coeffs, c) or (alpha, c) == (beta, d):
        raise InternalError(f"orbit key collision for m = {m} does not hold in the field")
    cert = M2Certificate(m, "member", F, g, alpha=alpha, c=c, beta=beta, d=d, stats=stats)
    build_three_monomial(cert)
    return cert


# ---------- exhaustive oracle ----------

def brute_force_m2(m):
    """Decide membership by examining every ordered pair u != v in Z_m \\ {0}.

    Pairs are grouped rather than looped: det = A_u B_v + A_v B_u (with
    A = x + y, B = x + z for x, y, z = g^u, g^{u s01}, g^{u s10}) vanishes
    exactly when A_u : B_u = A_v : B_v, and inside such a class b = 0 and
    1 + a + b = 0 reduce to equalities of x/D and (1 + x)/D.
    """
    prof = profile(m)
    if prof.r != 2:
        raise InvalidModulus(f"m = {m} has {prof.r} prime factors, expected 2")
    if m > BRUTE_MAX_M:
        raise BudgetExceeded(f"brute force capped at m <= {BRUTE_MAX_M}")
    start = time.monotonic()
    t = prof.t
    F = field_create(t)
    g = primitive_root(F, m).coeffs
    E = F.spread
    s01, s10 = prof.s01, prof.s10

    pw = [E.one] * m
    G = E.to(g)
    for e in range(1, m):
        pw[e] = E.mul(pw[e - 1], G)
    one = E.one
    us = range(1, m)
    X = [pw[u] for u in us]
    A = [pw[u] ^ pw[u * s01 % m] for u in us]
    B = [pw[u] ^ pw[u * s10 % m] for u in us]

    fin = [i for i, b in enumerate(B) if b]
    inf = [i for i, b in enumerate(B) if not b]
    D = [None] * len(X)
    Dinv = [None] * len(X)
    cls = [None] * len(X)
    for idx, inv in zip(fin, E.batch_inv([B[i] for i in fin])):
        D[idx], Dinv[idx] = B[idx], inv
        cls[idx] = E.mul(A[idx], inv)
    for idx, inv in zip(inf, E.batch_inv([A[i] for i in inf])):
        D[idx], Dinv[idx] = A[idx], inv
        cls[idx] = "inf"

    k2 = [E.mul(X[i] ^ one, Dinv[i]) for i in range(len(X))]
    k3 = [E.mul(X[i], Dinv[i]) for i in range(len(X))]

    classes = defaultdict(list)
    for i, key in enumerate(cls):
        classes[key].append(i)

    def pairs(counter):
        return sum(c * (c - 1) for c in counter.values())

    good = 0
    witness = None
    for members in classes.values():
        n = len(members)
        if n < 2:
            continue
        c2, c3, c23 = defaultdict(int), defaultdict(int), defaultdict(int)
        for i in members:
            c2[k2[i]] += 1
            c3[k3[i]] += 1
            c23[(k2[i], k3[i])] += 1
        g_here = n * (n - 1) - pairs(c2) - pairs(c3) + pairs(c23)
        if g_here <= 0:
            continue
        good += g_here
        for i in members:  # members ascend in u
            for j in members:
                if i != j and k2[i] != k2[j] and k3[i] != k3[j]:
                    cand = (i + 1, j + 1)
                    if witness is None or cand < witness:
                        witness = cand
                    break
            else:
                continue
            break

    stats = {"ordered_pairs": (m - 1) * (m - 2), "good_pairs": good, "t": t,
             "det_classes": len(classes)}
    if witness is None:
        stats["elapsed"] = round(time.monotonic() - start, 3)
        return M2Certificate(m, "nonmember", F, g, method="brute-force", stats=stats)

    u, v = witness
    alpha, c = _coset_position(u, m)
    beta, d = _coset_position(v, m)
    cert = M2Certificate(m, "member", F, g, alpha=alpha, c=c, beta=beta, d=d,
                         method="brute-force", stats=stats)
    build_three_monomial(cert)
    stats["elapsed"] = round(time.monotonic() - start, 3)
    return cert


def _coset_position(u, m):
    """(rep, c) with u = 2^c rep mod m and rep the coset minimum."""
    orbit = [u]
    x = 2 * u % m
    while x != u:
        orbit.append(x)
        x = 2 * x % m
    rep = min(orbit)
    c = (-orbit.index(rep)) % len(orbit)
    return rep, c


# Published three-term polynomials for two Mersenne semiprimes.  The root is
# gamma itself (the class of X) and each coefficient is given as a power of it.
PUBLISHED_POLYNOMIALS = {
    2047: {"t": 11, "modulus": (1 << 11) | 0b101, "terms": [(29, 1485), (27, 694), (0, 118)]},
    8388607: {"t": 23, "modulus": (1 << 23) | 0b100001,
              "terms": [(3526, 6526329), (3363, 7574532), (0, 2861754)]},
}


def published_polynomial(m):
    d = PUBLISHED_POLYNOMIALS[m]
    F = field_create(d["t"], d["modulus"])
    g = F.gen.coeffs
    return DecodingPolynomial.build(m, F, g, [(e, F.pow(g, lg)) for e, lg in d["terms"]])
