import numpy as np
import pytest

from ldcforge import codec
from ldcforge.codec import CodeSpec, Codeword, CorruptionPlan, corrupt, encode, local_decode
from ldcforge.decpoly import DecodingPolynomial, lagrange_polynomial, verify_decoding_polynomial
from ldcforge.errors import BudgetExceeded, IndexOutOfRange, MessageLengthMismatch
from ldcforge.matchfam import greedy_search, make_family


def naive_encode(spec, x):
    """Direct formula: value_v = sum_j x_j g^{<u_j, v>}."""
    F = spec.field
    out = []
    for idx in range(spec.N):
        v = spec.coords(idx)
        val = 0
        for xj, u in zip(x, spec.family.vectors):
            val ^= F.mul(xj, F.pow(spec.root, sum(a * b for a, b in zip(u, v)) % spec.m))
        out.append(val)
    return out


def rand_msg(spec, rng):
    return [int(a) for a in rng.integers(0, 1 << spec.field.t, size=spec.n)]


def test_encode_matches_direct_formula(spec15):
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rand_msg(spec15, rng)
        assert list(encode(spec15, x).values) == naive_encode(spec15, x)


def test_encode_examples(spec15):
    assert not encode(spec15, [0, 0]).values.any()
    one = make_family(15, [(6, 12)])
    spec = CodeSpec(one, lagrange_polynomial(15))
    assert encode(spec, [1])[0] == 1
    with pytest.raises(MessageLengthMismatch):
        encode(spec15, [1])


def test_linearity(spec511):
    rng = np.random.default_rng(1)
    x, y = rand_msg(spec511, rng), rand_msg(spec511, rng)
    xy = [a ^ b for a, b in zip(x, y)]
    assert ((encode(spec511, x).values ^ encode(spec511, y).values) == encode(spec511, xy).values).all()


def test_index_rule(spec15):
    assert spec15.index([1, 0]) == 1
    assert spec15.index([0, 1]) == 15
    assert spec15.coords(16) == [1, 1]
    for idx in range(spec15.N):
        assert spec15.index(spec15.coords(idx)) == idx


@pytest.mark.parametrize("name", ["spec15", "spec511"])
def test_perfect_completeness(name, request):
    spec = request.getfixturevalue(name)
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = rand_msg(spec, rng)
        cw = encode(spec, x)
        for i in range(1, spec.n + 1):
            for s in range(100):
                V = np.random.default_rng([s, i]).integers(0, spec.m, size=(1, spec.h))
                assert codec._decode_batch(spec, cw.values, i, V)[0] == x[i - 1]
    # the scalar decoder agrees
    for s in range(20):
        assert local_decode(spec, cw, 1, np.random.default_rng(s)).coeffs == x[0]


def test_query_counts(spec15, spec511, cert2047):
    calls = []

    def oracle(q):
        calls.append(q)
        return 0

    local_decode(spec511, oracle, 1, np.random.default_rng(0))
    assert len(calls) == 3
    calls.clear()
    local_decode(spec15, oracle, 2, np.random.default_rng(0))
    assert len(calls) == spec15.k <= 4
    fam = make_family(2047, [(0, 0)])  # zero vector alone: valid, no pairs
    assert CodeSpec(fam, cert2047.polynomial).k == 3


def test_decode_errors(spec15):
    cw = encode(spec15, [1, 2])
    with pytest.raises(IndexOutOfRange):
        local_decode(spec15, cw, 3, np.random.default_rng(0))
    with pytest.raises(IndexOutOfRange):
        local_decode(spec15, cw, 0, np.random.default_rng(0))


def test_decoder_without_constant_term(spec15):
    """Multiplying P by X^w keeps the decoding conditions; decoding still works."""
    P = spec15.poly
    shifted = DecodingPolynomial.build(15, P.field, P.root, [(e + 5, a) for e, a in P.terms])
    assert verify_decoding_polynomial(shifted) and 0 not in shifted.exponents
    spec = CodeSpec(spec15.family, shifted)
    cw = encode(spec, [7, 9])
    for s in range(30):
        assert local_decode(spec, cw, 2, np.random.default_rng(s)).coeffs == 9


def test_collision_and_lagrange_codes_agree(spec511):
    lag = CodeSpec(spec511.family, lagrange_polynomial(511))
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rand_msg(spec511, rng)
        for spec in (spec511, lag):
            cw = encode(spec, x)
            for i in (1, 2):
                assert local_decode(spec, cw, i, rng).coeffs == x[i - 1]


def test_corruption_properties(spec511):
    cw = encode(spec511, [3, 5])
    assert corrupt(cw, CorruptionPlan(0.0)).hamming(cw) == 0
    plan = CorruptionPlan(0.01, seed=4)
    bad = corrupt(cw, plan)
    pos = plan.resolve(cw.spec.N)
    assert bad.hamming(cw) == len(pos) == int(0.01 * cw.spec.N)
    assert (bad.values[pos] != cw.values[pos]).all()
    explicit = CorruptionPlan(0.01, positions=[0, 1, 2], policy="zero")
    z = corrupt(cw, explicit)
    assert (z.values[:3] == 0).all() and z.hamming(cw) <= 3
    with pytest.raises(ValueError):
        CorruptionPlan(0.00001, positions=[0, 1, 2, 3, 4]).resolve(cw.spec.N)


def test_success_rate_zero_delta(spec15):
    rep = codec.success_rate(spec15, [4, 2], CorruptionPlan(0.0), 500, seed=1)
    assert rep.rates == [1.0, 1.0] and rep.floor == 1.0


@pytest.mark.parametrize("name,delta", [("spec15", 0.02), ("spec511", 0.01)])
def test_union_bound(name, delta, request):
    spec = request.getfixturevalue(name)
    trials = 10**4
    rep = codec.success_rate(spec, [1, 2], CorruptionPlan(delta, seed=3), trials, seed=9)
    kd = spec.k * delta
    for r in rep.rates:
        assert 1 - r <= kd + 3 * (kd * (1 - kd) / trials) ** 0.5


def test_smoothness(spec15, spec511):
    a = codec.smoothness_audit(spec15, 1)
    assert len(a.histograms) == spec15.k
    assert all(len(hst) == 225 and (hst == 1).all() for hst in a.histograms)
    b = codec.smoothness_audit(spec15, 2)
    assert all((x == y).all() for x, y in zip(a.histograms, b.histograms))
    assert codec.smoothness_audit(spec511, 2).uniform


def test_smoothness_budget():
    fam = greedy_search(511, 3, 1, seed=0)
    spec = CodeSpec(fam, lagrange_polynomial(511))
    with pytest.raises(BudgetExceeded):
        codec.smoothness_audit(spec, 1)


def test_codeword_file_round_trip(spec511, tmp_path):
    cw = encode(spec511, [0x1FF, 0x0AB])
    data = cw.to_bytes()
    assert data[:4] == b"LDC1"
    assert int.from_bytes(data[4:8], "little") == 9
    assert int.from_bytes(data[8:12], "little") == 511
    assert int.from_bytes(data[12:16], "little") == 2
    assert len(data) == 16 + spec511.N * 2
    assert (Codeword.from_bytes(spec511, data).values == cw.values).all()


def test_spec_json_round_trip(spec15):
    back = CodeSpec.from_json(spec15.to_json())
    assert back.family == spec15.family and back.poly == spec15.poly


def test_spec_rejects_mismatch(spec15, cert511):
    with pytest.raises(ValueError):
        CodeSpec(spec15.family, cert511.polynomial)
