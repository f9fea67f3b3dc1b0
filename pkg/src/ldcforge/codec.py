"""Matching-vector LDC: codewords indexed by Z_m^h, k-query local decoding.

C(e_j)_v = g^{<u_j, v>} and C(x) = sum_j x_j C(e_j).  Decoding position i
queries v + b_l u_i for each term a_l X^{b_l} of the decoding polynomial and
returns g^{-<u_i, v>} sum_l a_l y_{v + b_l u_i}.
"""

import math
import struct
from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import FieldElement, TABLE_MAX_T, _vec_clmul_const
from .decpoly import DecodingPolynomial, verify_decoding_polynomial
from .errors import (
    BudgetExceeded,
    IndexOutOfRange,
    MessageLengthMismatch,
    RepresentationUnsupported,
)
from .matchfam import MatchingFamily, verify_matching
from .modulus import profile

MAX_CODEWORD_BYTES = 2 * 2**30
MAX_TABLE_M = 2**21
AUDIT_MAX_N = 10**6
MAGIC = b"LDC1"


def _raw(x):
    return x.coeffs if isinstance(x, FieldElement) else int(x)


@dataclass
class CodeSpec:
    family: MatchingFamily
    poly: DecodingPolynomial

    def __post_init__(self):
        f, P = self.family, self.poly
        self.profile = profile(P.m)
        if f.m != P.m:
            raise ValueError(f"family modulus {f.m} != polynomial modulus {P.m}")
        if tuple(sorted(f.target_set)) != tuple(self.profile.canonical):
            raise ValueError("family target set is not the canonical set")
        if not verify_matching(f):
            raise ValueError("family is not a matching family")
        if not verify_decoding_polynomial(P, self.profile.canonical):
            raise ValueError("polynomial is not a decoding polynomial")
        if self.field.t > 63:
            raise RepresentationUnsupported("materialized codes need t <= 63")
        if self.m > MAX_TABLE_M:
            raise BudgetExceeded(f"m = {self.m} exceeds the power-table cap {MAX_TABLE_M}")
        if self.N * 8 > MAX_CODEWORD_BYTES:
            raise BudgetExceeded(f"codeword length {self.N} exceeds the memory cap")

    @property
    def m(self):
        return self.poly.m

    @property
    def h(self):
        return self.family.h

    @property
    def n(self):
        return self.family.n

    @property
    def k(self):
        return self.poly.k

    @property
    def N(self):
        return self.m ** self.h

    @property
    def field(self):
        return self.poly.field

    @property
    def root(self):
        return self.poly.root

    @property
    def element_bytes(self):
        return (self.field.t + 7) // 8

    def powers(self):
        """g^0 .. g^{m-1} as an int64 array."""
        cached = getattr(self, "_powers", None)
        if cached is None:
            F, g = self.field, self.root
            out = np.empty(self.m, dtype=np.int64)
            x = 1
            for e in range(self.m):
                out[e] = x
                x = F.mul(x, g)
            self._powers = cached = out
        return cached

    def index(self, v):
        """Mixed radix: sum v_j m^(j-1), first coordinate least significant."""
        idx = 0
        for c in reversed(v):
            idx = idx * self.m + int(c) % self.m
        return idx

    def coords(self, idx):
        out = []
        for _ in range(self.h):
            idx, r = divmod(idx, self.m)
            out.append(r)
        return out

    def to_json(self):
        return {"family": self.family.to_json(), "poly": self.poly.to_json()}

    @classmethod
    def from_json(cls, d):
        return cls(MatchingFamily.from_json(d["family"]), DecodingPolynomial.from_json(d["poly"]))


@dataclass
class Codeword:
    spec: CodeSpec
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.spec.N:
            raise ValueError("codeword length != N")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, idx):
        return int(self.values[idx])

    def __call__(self, idx):
        if not 0 <= idx < len(self.values):
            raise IndexOutOfRange(f"index {idx} outside [0, {len(self.values)})")
        return int(self.values[idx])

    def hamming(self, other):
        return int(np.count_nonzero(self.values != other.values))

    def to_bytes(self):
        s = self.spec
        header = MAGIC + struct.pack("<III", s.field.t, s.m, s.h)
        nb = s.element_bytes
        body = self.values.astype("<u8").view(np.uint8).reshape(-1, 8)[:, :nb]
        return header + body.tobytes()

    @classmethod
    def from_bytes(cls, spec, data):
        if data[:4] != MAGIC:
            raise ValueError("bad codeword magic")
        t, m, h = struct.unpack("<III", data[4:16])
        if (t, m, h) != (spec.field.t, spec.m, spec.h):
            raise ValueError(f"header (t, m, h) = {(t, m, h)} does not match spec")
        nb = spec.element_bytes
        raw = np.frombuffer(data, dtype=np.uint8, offset=16)
        if len(raw) != spec.N * nb:
            raise ValueError("codeword body has the wrong length")
        buf = np.zeros((spec.N, 8), dtype=np.uint8)
        buf[:, :nb] = raw.reshape(spec.N, nb)
        return cls(spec, buf.view("<u8").reshape(-1).astype(np.int64))


def _const_table(spec, c):
    """c * g^e for e in [0, m) as an int64 array."""
    F = spec.field
    pw = spec.powers()
    if F.t <= 31:
        return _vec_clmul_const(pw.astype(np.uint64), c, F).astype(np.int64)
    return np.array([F.mul(c, int(y)) for y in pw], dtype=np.int64)


def _inner_all(spec, u):
    """<u, v> mod m for every v in index order."""
    m, h = spec.m, spec.h
    ar = np.arange(m, dtype=np.int64)
    ip = np.zeros((1,) * h, dtype=np.int64)
    for c in range(h):
        shape = [1] * h
        shape[h - 1 - c] = m  # coordinate c varies along axis h-1-c
        ip = (ip + (ar * u[c] % m).reshape(shape)) % m
    return np.broadcast_to(ip, (m,) * h).reshape(-1)


def encode(spec, x):
    if len(x) != spec.n:
        raise MessageLengthMismatch(f"message has {len(x)} symbols, code expects {spec.n}")
    values = np.zeros(spec.N, dtype=np.int64)
    for xj, u in zip(x, spec.family.vectors):
        xj = _raw(xj)
        if not xj:
            continue
        values ^= _const_table(spec, xj)[_inner_all(spec, u)]
    return Codeword(spec, values)


def query_indices(spec, i, v):
    """The k queried indices for message position i (1-based) and v."""
    if not 1 <= i <= spec.n:
        raise IndexOutOfRange(f"message index {i} outside [1, {spec.n}]")
    u = spec.family.vectors[i - 1]
    m = spec.m
    return [spec.index([(vc + b * uc) % m for vc, uc in zip(v, u)]) for b in spec.poly.exponents]


def combine(spec, i, v, answers):
    """g^{-<u_i, v>} * sum_l a_l y_l as a raw field value."""
    F = spec.field
    u = spec.family.vectors[i - 1]
    acc = 0
    for (_, a), y in zip(spec.poly.terms, answers):
        acc ^= F.mul(a, _raw(y))
    ip = sum(a * b for a, b in zip(u, v)) % spec.m
    return F.mul(acc, F.pow(spec.root, -ip))


def local_decode(spec, oracle, i, rng):
    """One run of the k-query decoder; all queries are fixed before reading."""
    v = [int(c) for c in rng.integers(0, spec.m, size=spec.h)]
    queries = query_indices(spec, i, v)
    answers = [oracle(q) for q in queries]
    return FieldElement(spec.field, combine(spec, i, v, answers))


@dataclass
class CorruptionPlan:
    delta: float
    positions: list = None
    policy: str = "flip"  # or "zero"
    seed: int = 0

    def resolve(self, N):
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")
        budget = math.floor(self.delta * N)
        if self.positions is not None:
            pos = np.unique(np.asarray(self.positions, dtype=np.int64))
            if len(pos) > budget:
                raise ValueError(f"{len(pos)} positions exceed delta*N = {budget}")
            if len(pos) and (pos.min() < 0 or pos.max() >= N):
                raise IndexOutOfRange("corruption position outside the codeword")
            return pos
        rng = np.random.default_rng(self.seed)
        return np.sort(rng.choice(N, size=budget, replace=False))


def corrupt(cw, plan):
    pos = plan.resolve(len(cw))
    values = cw.values.copy()
    if plan.policy == "flip":
        rng = np.random.default_rng([plan.seed, 1])
        mask = rng.integers(1, 1 << cw.spec.field.t, size=len(pos), dtype=np.int64)
        values[pos] ^= mask
    elif plan.policy == "zero":
        values[pos] = 0
    else:
        raise ValueError(f"unknown replacement policy {plan.policy!r}")
    out = Codeword(cw.spec, values)
    dist = out.hamming(cw)
    if plan.policy == "flip":
        assert dist == len(pos)
    else:
        assert dist <= len(pos)
    return out


@dataclass
class SuccessReport:
    rates: list
    trials: int
    k: int
    delta: float
    corrupted: int
    floor: float = dc_field(init=False)

    def __post_init__(self):
        self.floor = 1 - self.k * self.delta

    def to_json(self):
        return {"rates": self.rates, "trials": self.trials, "k": self.k,
                "delta": self.delta, "corrupted": self.corrupted, "floor": self.floor}


def _decode_batch(spec, word, i, V):
    """Vectorized decoding of position i for each row v of V (t <= 24)."""
    F = spec.field
    T = F.tables
    m = spec.m
    u = np.asarray(spec.family.vectors[i - 1], dtype=np.int64)
    radix = m ** np.arange(spec.h, dtype=np.int64)
    acc = np.zeros(len(V), dtype=np.int64)
    for b, a in spec.poly.terms:
        idx = ((V + b * u) % m) @ radix
        acc ^= T.mul(word[idx], a)
    ip = (V @ u) % m
    gl = int(T.log[spec.root])
    shift = T.exp[(-ip * gl) % T.q1]
    return T.mul(acc, shift)


def success_rate(spec, x, plan, trials, seed=0):
    """Per-index empirical success of local_decode against a corrupted word."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cw = encode(spec, x)
    bad = corrupt(cw, plan)
    corrupted = cw.hamming(bad)
    rates = []
    for i in range(1, spec.n + 1):
        rng = np.random.default_rng([seed, i])
        want = _raw(x[i - 1])
        if spec.field.t <= TABLE_MAX_T:
            V = rng.integers(0, spec.m, size=(trials, spec.h))
            got = _decode_batch(spec, bad.values, i, V)
            ok = int(np.count_nonzero(got == want))
        else:
            ok = sum(local_decode(spec, bad, i, rng).coeffs == want for _ in range(trials))
        rates.append(ok / trials)
    return SuccessReport(rates, trials, spec.k, plan.delta, corrupted)


def all_query_indices(spec, i):
    """(k, N) array: slot l's queried index for every v, v in index order."""
    m, h = spec.m, spec.h
    u = np.asarray(spec.family.vectors[i - 1], dtype=np.int64)
    idx = np.arange(spec.N, dtype=np.int64)
    V = np.stack([(idx // m**c) % m for c in range(h)], axis=1)
    radix = m ** np.arange(h, dtype=np.int64)
    return np.stack([((V + b * u) % m) @ radix for b in spec.poly.exponents])


@dataclass
class SmoothnessAudit:
    histograms: list

    @property
    def uniform(self):
        return all(bool((hst == 1).all()) for hst in self.histograms)


def smoothness_audit(spec, i):
    if spec.N > AUDIT_MAX_N:
        raise BudgetExceeded(f"N = {spec.N} too large for exact audit")
    if not 1 <= i <= spec.n:
        raise IndexOutOfRange(f"message index {i} outside [1, {spec.n}]")
    Q = all_query_indices(spec, i)
    return SmoothnessAudit([np.bincount(row, minlength=spec.N) for row in Q])
