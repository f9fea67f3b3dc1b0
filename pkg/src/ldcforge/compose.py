"""Product composition of decoding polynomials and the query-count planner.

For coprime m1, m2 and m = m1 m2, P(X) = P1(X^{mu m2}) P2(X^{nu m1}) is a
decoding polynomial for m once both inputs are moved into GF(2^t),
t = ord_m(2), with gamma_{m1} sent to gamma_m^{mu m2} (and likewise for m2).
"""

import math
from dataclasses import dataclass

from .algebra import field_create, primitive_root
from .decpoly import DecodingPolynomial, root_has_order, verify_decoding_polynomial
from .errors import CompositionInvalid, CrtConflict, InventoryExhausted, RepresentationUnsupported
from .modulus import pairwise_coprime, profile
from .ntheory import is_prime


def minimal_polynomial(field, x):
    """Minimal polynomial of x over GF(2) as an int (bit i = coeff of X^i)."""
    conj = [x]
    y = field.sqr(x)
    while y != x:
        conj.append(y)
        y = field.sqr(y)
    coeffs = [1]
    for c in conj:
        out = [0] * (len(coeffs) + 1)
        for i, a in enumerate(coeffs):
            out[i + 1] ^= a
            out[i] ^= field.mul(a, c)
        coeffs = out
    if any(a not in (0, 1) for a in coeffs):
        raise CompositionInvalid("minimal polynomial has coefficients outside GF(2)")
    return sum(a << i for i, a in enumerate(coeffs))


def _eval_binary_poly(field, f, x):
    acc = 0
    for i in range(f.bit_length() - 1, -1, -1):
        acc = field.mul(acc, x) ^ (f >> i & 1)
    return acc


class _Embedding:
    """Field map GF(2^t1) -> GF(2^t) sending the root `g1` to `rho`."""

    def __init__(self, small, g1, big, rho):
        self.small, self.big = small, big
        t1 = small.t
        # columns: powers of g1; solve c = sum e_i g1^i by elimination on rows
        powers = [1]
        for _ in range(t1 - 1):
            powers.append(small.mul(powers[-1], g1))
        self.basis = powers
        rows = []  # (pivot bit, value bits, combination mask)
        for i, p in enumerate(powers):
            v, comb = p, 1 << i
            for pb, pv, pc in rows:
                if v >> pb & 1:
                    v ^= pv
                    comb ^= pc
            if not v:
                raise RepresentationUnsupported("root does not generate its field")
            rows.append((v.bit_length() - 1, v, comb))
        self.rows = rows
        self.rho_powers = [1]
        for _ in range(t1 - 1):
            self.rho_powers.append(big.mul(self.rho_powers[-1], rho))

    def __call__(self, c):
        comb = 0
        v = c
        for pb, pv, pc in self.rows:  # each row is free of earlier pivots
            if v >> pb & 1:
                v ^= pv
                comb ^= pc
        if v:
            raise RepresentationUnsupported("coefficient outside the span of the root powers")
        out = 0
        for i, rp in enumerate(self.rho_powers):
            if comb >> i & 1:
                out ^= rp
        return out


def _matching_exponent(P, big, g, m_other):
    """Least unit j mod P.m with minpoly(P.root)(g^{j m_other}) = 0."""
    f = minimal_polynomial(P.field, P.root)
    for j in range(1, P.m):
        if math.gcd(j, P.m) != 1:
            continue
        if _eval_binary_poly(big, f, big.pow(g, j * m_other)) == 0:
            return j
    raise CompositionInvalid(f"no conjugate of the m = {P.m} root found")


@dataclass
class CompositionPlan:
    m1: int
    m2: int
    t1: int
    t2: int
    t: int
    mu: int
    nu: int
    P1: DecodingPolynomial
    P2: DecodingPolynomial
    result: DecodingPolynomial

    def to_json(self):
        return {
            "m1": str(self.m1), "m2": str(self.m2),
            "t1": self.t1, "t2": self.t2, "t": self.t,
            "mu": self.mu, "nu": self.nu,
            "k1": self.P1.k, "k2": self.P2.k, "k": self.result.k,
            "poly": self.result.to_json(),
        }


def compose_plan(P1, P2):
    m1, m2 = P1.m, P2.m
    if math.gcd(m1, m2) != 1:
        raise CrtConflict(f"gcd({m1}, {m2}) = {math.gcd(m1, m2)}")
    for P in (P1, P2):
        if not verify_decoding_polynomial(P):
            raise CompositionInvalid(f"input over m = {P.m} is not a decoding polynomial")
    m = m1 * m2
    prof = profile(m)
    F = field_create(prof.t)
    g = primitive_root(F, m).coeffs
    mu = _matching_exponent(P1, F, g, m2)
    nu = _matching_exponent(P2, F, g, m1)
    rho1, rho2 = F.pow(g, mu * m2), F.pow(g, nu * m1)
    if not (root_has_order(F, rho1, m1) and root_has_order(F, rho2, m2)):
        raise CompositionInvalid("embedded roots have the wrong order")
    emb1 = _Embedding(P1.field, P1.root, F, rho1)
    emb2 = _Embedding(P2.field, P2.root, F, rho2)
    terms = []
    for e1, a1 in P1.terms:
        c1 = emb1(a1)
        for e2, a2 in P2.terms:
            terms.append(((mu * m2 * e1 + nu * m1 * e2) % m, F.mul(c1, emb2(a2))))
    P = DecodingPolynomial.build(m, F, g, terms)
    if P.k > P1.k * P2.k or not verify_decoding_polynomial(P, prof.canonical):
        raise CompositionInvalid(f"composed polynomial over m = {m} fails verification")
    return CompositionPlan(m1, m2, P1.field.t, P2.field.t, prof.t, mu, nu, P1, P2, P)


def compose(P1, P2):
    return compose_plan(P1, P2).result


# ---------- planner ----------

@dataclass
class QueryPlan:
    r: int
    recipe: list  # dicts: {"modulus", "primes", "queries", "kind"}
    k_bound: int

    def to_json(self):
        return {
            "r": self.r,
            "k_bound": str(self.k_bound),
            "recipe": [
                {"modulus": str(b["modulus"]) if b["modulus"] is not None else None,
                 "primes": b["primes"], "queries": b["queries"], "kind": b["kind"]}
                for b in self.recipe
            ],
        }


def _pool_primes(count, avoid, pool=None):
    src = iter(pool) if pool is not None else (p for p in range(3, 10**7, 2) if is_prime(p))
    out = []
    for p in src:
        if len(out) == count:
            break
        if all(math.gcd(p, a) == 1 for a in avoid) and p not in out:
            out.append(p)
    if len(out) < count:
        raise InventoryExhausted(f"prime pool supplied {len(out)} of {count} primes")
    return out


def plan_queries(r, inventory, pool=None, symbolic=False):
    """Cheapest block recipe for an r-prime modulus.

    Uses c = min(#members, r//2) three-query blocks from the inventory (never
    leaving a single prime over) and one interpolation block over the other
    r - 2c primes, costing 2^(r-2c) queries.  With symbolic=True the primes of
    the leftover block are not materialized.
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    members = []
    for x in inventory:
        x = int(x)
        if all(math.gcd(x, y) == 1 for y in members):
            members.append(x)
    ok, witness = pairwise_coprime(members)
    assert ok, witness
    c = min(len(members), r // 2)
    if r - 2 * c == 1:
        c -= 1
    chosen = members[:c]
    rest = r - 2 * c
    recipe = [{"modulus": x, "primes": 2, "queries": 3, "kind": "m2"} for x in chosen]
    if rest:
        if symbolic:
            block = None
        else:
            primes = _pool_primes(rest, chosen, pool)
            block = math.prod(primes)
        recipe.append({"modulus": block, "primes": rest, "queries": 2**rest, "kind": "interpolation"})
    return QueryPlan(r, recipe, 3**c * 2**rest)


def closed_form_bound(r, cap=51):
    """Closed-form bound with up to `cap` three-query members."""
    if r >= 2 * cap + 2:
        return 3**cap * 2 ** (r - 2 * cap)
    if r % 2 == 0:
        return 3 ** (r // 2)
    return 8 * 3 ** ((r - 3) // 2)
