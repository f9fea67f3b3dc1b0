import itertools
import random

import pytest

from ldcforge import decpoly
from ldcforge.algebra import field_create, primitive_root
from ldcforge.decpoly import (
    DecodingPolynomial,
    M2Certificate,
    brute_force_m2,
    build_three_monomial,
    collision_search,
    coset_ratio,
    lagrange_polynomial,
    verify_decoding_polynomial,
)
from ldcforge.errors import (
    BudgetExceeded,
    CertificateInconsistent,
    ForbiddenCoset,
    InvalidModulus,
)
from ldcforge.modulus import coset_representatives, profile

SMALL = [15, 21, 33, 35, 39, 51, 55, 57, 65, 69, 77, 85, 87, 91, 93, 95]


def literal_pairs(m):
    """Every ordered pair (u, v): det test, solve rows s01/s10, check row 1."""
    prof = profile(m)
    F = field_create(prof.t)
    g = primitive_root(F, m).coeffs
    s01, s10 = prof.s01, prof.s10
    pw = [F.pow(g, e) for e in range(m)]
    good = []
    for u in range(1, m):
        for v in range(1, m):
            if u == v:
                continue
            xu, yu, zu = pw[u], pw[u * s01 % m], pw[u * s10 % m]
            xv, yv, zv = pw[v], pw[v * s01 % m], pw[v * s10 % m]
            det = F.mul(xu ^ yu, xv ^ zv) ^ F.mul(xu ^ zu, xv ^ yv)
            if det:
                continue
            if yv != zv:
                a = F.div(yu ^ zu, yv ^ zv)
            else:
                a = F.div(xu ^ yu, xv ^ yv)
            b = yu ^ F.mul(a, yv)
            assert xu ^ F.mul(a, xv) ^ b == 0
            if a and b and (1 ^ a ^ b):
                good.append((u, v))
    return good


@pytest.mark.parametrize("m", SMALL + [511])
def test_brute_force_matches_literal_pair_loop(m):
    pairs = literal_pairs(m)
    cert = brute_force_m2(m)
    assert cert.stats["good_pairs"] == len(pairs)
    assert cert.is_member == bool(pairs)
    if pairs:
        assert (cert.u, cert.v) == min(pairs)


@pytest.mark.parametrize("m", SMALL + [511, 1057, 2047])
def test_collision_agrees_with_brute_force(m):
    c, b = collision_search(m), brute_force_m2(m)
    assert c.verdict == b.verdict
    for cert in (c, b):
        if cert.is_member:
            assert verify_decoding_polynomial(cert.polynomial)
            assert cert.polynomial.k == 3


@pytest.mark.parametrize("m", [15, 35, 511, 1057, 2047])
def test_backends_agree(m):
    a = collision_search(m, backend="tables")
    b = collision_search(m, backend="spread")
    assert a.to_json()["verdict"] == b.verdict
    assert (a.alpha, a.beta, a.c, a.d) == (b.alpha, b.beta, b.c, b.d)


def test_sharded_search_is_deterministic():
    one = collision_search(1057, backend="spread", workers=1)
    two = collision_search(1057, backend="spread", workers=2)
    assert (one.alpha, one.beta, one.c, one.d) == (two.alpha, two.beta, two.c, two.d)
    assert one.polynomial == two.polynomial


@pytest.mark.parametrize("m", [511, 1057])
def test_certificate_is_lexicographically_minimal(m):
    prof = profile(m)
    F = field_create(prof.t)
    gamma = primitive_root(F, m)
    reps = [int(a) for a in coset_representatives(m, prof.t, units_only=True)]
    R = {a: coset_ratio(prof, gamma, a).coeffs for a in reps}
    t = prof.t
    best = None
    for a, b in itertools.combinations_with_replacement(reps, 2):
        if best is not None and a > best[0]:
            break
        for c in range(t):
            for d in range(t):
                if (a, c) != (b, d) and F.frob(R[a], c) == F.frob(R[b], d):
                    cand = (a, b, c, d)
                    if best is None or cand < best:
                        best = cand
    cert = collision_search(m)
    assert (cert.alpha, cert.beta, cert.c, cert.d) == best


def test_orbit_key_soundness_on_random_non_collisions():
    m = 2047
    prof = profile(m)
    F = field_create(prof.t)
    gamma = primitive_root(F, m)
    reps = [int(a) for a in coset_representatives(m, prof.t, units_only=True)]
    R = {a: coset_ratio(prof, gamma, a).coeffs for a in reps}

    def key(x):
        return min(F.frob(x, j) for j in range(prof.t))

    rng = random.Random(3)
    for _ in range(1000):
        a, b = rng.sample(reps, 2)
        c, d = rng.randrange(prof.t), rng.randrange(prof.t)
        if F.frob(R[a], c) == F.frob(R[b], d):
            assert key(R[a]) == key(R[b])
        if key(R[a]) != key(R[b]):
            assert all(F.frob(R[a], 0) != F.frob(R[b], j) for j in range(prof.t))
    # every key collision is a genuine Frobenius relation
    groups = {}
    for a in reps:
        groups.setdefault(key(R[a]), []).append(a)
    for members in groups.values():
        for b in members[1:]:
            assert any(F.frob(R[b], j) == R[members[0]] for j in range(prof.t))


def test_coset_ratio_examples():
    F = field_create(4)
    g = primitive_root(F, 15)
    P = profile(15)
    assert coset_ratio(P, g, 1) == g ** 3
    assert coset_ratio(P, g, 7) == g ** 11
    with pytest.raises(ForbiddenCoset):
        coset_ratio(P, g, 3)


def test_ratio_terms_never_vanish_on_admissible_cosets():
    for m in (511, 1057, 2047):
        P = profile(m)
        F = field_create(P.t)
        g = primitive_root(F, m).coeffs
        for a in coset_representatives(m, P.t, units_only=True):
            a = int(a)
            x = F.pow(g, a)
            assert x != F.pow(g, a * P.s01 % m)
            assert x != F.pow(g, a * P.s10 % m)


def test_decisions_for_known_moduli():
    assert collision_search(15).verdict == "nonmember"
    assert brute_force_m2(15).verdict == "nonmember"
    assert brute_force_m2(15).stats["ordered_pairs"] == 14 * 13
    assert collision_search(511).verdict == "member"
    assert brute_force_m2(511).verdict == "member"


def test_member_certificate_fields(cert2047):
    c = cert2047
    m = 2047
    assert c.u == pow(2, c.c, m) * c.alpha % m
    assert c.v == pow(2, c.d, m) * c.beta % m
    assert c.alpha <= c.beta and (c.alpha, c.c) != (c.beta, c.d)
    for a in (c.alpha, c.beta):
        assert all(a % p for p in (23, 89))
    F = c.field
    assert c.a and c.b and (1 ^ c.a ^ c.b)
    P = c.polynomial
    assert P.k == 3 and P.at_power(0) == 1


def test_certificate_json_round_trip(cert2047, tmp_path):
    d = cert2047.to_json()
    back = M2Certificate.from_json(d)
    assert back.polynomial == cert2047.polynomial
    assert (back.alpha, back.beta, back.c, back.d, back.a, back.b) == (
        cert2047.alpha, cert2047.beta, cert2047.c, cert2047.d, cert2047.a, cert2047.b)
    assert build_three_monomial(back) == cert2047.polynomial
    assert d["verdict"] == "member" and d["m"] == "2047"
    assert {"exp", "coef_hex"} <= set(d["poly"]["terms"][0])


def test_build_three_monomial_rejects_bad_certificates(cert2047):
    with pytest.raises(CertificateInconsistent):
        build_three_monomial(collision_search(15))
    bad = M2Certificate.from_json(cert2047.to_json())
    bad.beta = bad.beta + 1 if (bad.beta + 1) % 23 and (bad.beta + 1) % 89 else bad.beta + 2
    with pytest.raises(CertificateInconsistent):
        build_three_monomial(bad)


def test_published_polynomials_verify():
    for m in (2047, 8388607):
        P = decpoly.published_polynomial(m)
        assert P.k == 3
        assert verify_decoding_polynomial(P)
        assert P.root == primitive_root(P.field, m).coeffs


def test_tampered_polynomial_fails():
    P = decpoly.published_polynomial(2047)
    F = P.field
    terms = [(e, a) for e, a in P.terms if e] + [(0, F.pow(2, 117))]
    assert not verify_decoding_polynomial(DecodingPolynomial.build(2047, F, P.root, terms))
    assert not verify_decoding_polynomial(DecodingPolynomial.build(2047, F, P.root, []))


def vandermonde_interpolation(m):
    """Solve for coefficients c_0..c_{2^r-1} with P(x_j) = y_j by elimination."""
    prof = profile(m)
    F = field_create(prof.t)
    g = primitive_root(F, m).coeffs
    pts = [(1, 1)] + [(F.pow(g, s), 0) for s in prof.canonical]
    n = len(pts)
    rows = [[F.pow(x, j) for j in range(n)] + [y] for x, y in pts]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col])
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = F.inv(rows[col][col])
        rows[col] = [F.mul(v, inv) for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [v ^ F.mul(f, w) for v, w in zip(rows[r], rows[col])]
    return {j: rows[j][n] for j in range(n) if rows[j][n]}


@pytest.mark.parametrize("m", [15, 511, 2047, 105])
def test_lagrange_matches_vandermonde(m):
    P = lagrange_polynomial(m)
    assert dict(P.terms) == vandermonde_interpolation(m)
    assert P.k <= 2 ** profile(m).r
    assert verify_decoding_polynomial(P)
    assert P(P.field.one) == P.field.one


def test_no_two_term_polynomials_small_fields():
    """Exhaustive over a X^e + b (any 2-term polynomial divided by a monomial)."""
    for m in [15, 21, 33, 51, 85, 93]:
        prof = profile(m)
        F = field_create(prof.t)
        g = primitive_root(F, m).coeffs
        pw = [F.pow(g, e) for e in range(m)]
        for e in range(1, m):
            vals = [pw[e * s % m] for s in prof.canonical]
            for a in range(1, F.size):
                b = 1 ^ a  # P(1) = a + b = 1
                assert not all(F.mul(a, w) == b for w in vals), (m, e, a)


def test_no_two_term_polynomials_exponent_form():
    """a g^{es} + b = 0 on S forces g^{e s} = g^e for all s, i.e. e (s - 1) = 0 mod m,
    which for s = s01, s10 means p | e and q | e."""
    from ldcforge.ntheory import factorize
    for m in range(15, 10**4, 2):
        f = factorize(m)
        if len(f) != 2 or any(x > 1 for x in f.values()):
            continue
        S = profile(m).canonical
        assert not any(all(e * (s - 1) % m == 0 for s in S) for e in range(1, m)), m


def test_errors():
    with pytest.raises(InvalidModulus):
        collision_search(105)
    with pytest.raises(InvalidModulus):
        brute_force_m2(105)
    with pytest.raises(BudgetExceeded):
        brute_force_m2(100003 * 3)
    with pytest.raises(BudgetExceeded):
        collision_search((2**41 - 1))


def test_unknown_when_budget_runs_out():
    cert = collision_search(2987, budget=1e-6, backend="spread")
    assert cert.verdict == "unknown"


def test_polynomial_json_round_trip(cert511):
    P = cert511.polynomial
    assert DecodingPolynomial.from_json(P.to_json()) == P
