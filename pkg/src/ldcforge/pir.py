"""k-server PIR from a perfectly smooth LDC.

Server j holds the encoded database and answers the single codeword
coordinate it is asked for; the user recombines with the local decoder.
aux is the decoder's only coin: the uniform v in Z_m^h.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from .algebra import FieldElement, element_hex
from .codec import AUDIT_MAX_N, Codeword, all_query_indices, combine, encode, query_indices
from .errors import AuxInvalid, BudgetExceeded, IndexOutOfRange, ReconstructionError


@dataclass
class PirScheme:
    code: object  # CodeSpec
    n: int = None

    def __post_init__(self):
        if self.n is None:
            self.n = self.code.n
        if not 1 <= self.n <= self.code.n:
            raise ValueError(f"database length {self.n} outside [1, {self.code.n}]")

    @property
    def k(self):
        return self.code.k

    @property
    def comm_bits(self):
        return self.k * (math.ceil(math.log2(self.code.N)) + self.code.field.t)

    @property
    def wire_bits(self):
        return self.k * 8 * (8 + self.code.element_bytes)


# ---------- wire format ----------

def pack_query(idx):
    return struct.pack("<Q", idx)


def unpack_query(data):
    if len(data) != 8:
        raise ValueError("query must be 8 bytes")
    return struct.unpack("<Q", data)[0]


def pack_answer(value, t):
    return int(value).to_bytes((t + 7) // 8, "little")


def unpack_answer(data):
    return int.from_bytes(data, "little")


def pack_aux(v):
    return struct.pack(f"<{len(v)}I", *v)


class Server:
    """Stateless apart from its copy of the codeword."""

    def __init__(self, codeword):
        self.codeword = codeword

    def handle(self, query_bytes):
        idx = unpack_query(query_bytes)
        return pack_answer(answer(self.codeword, idx).coeffs, self.codeword.spec.field.t)


def _parse_aux(scheme, aux):
    code = scheme.code
    if isinstance(aux, (bytes, bytearray)):
        if len(aux) != 4 * code.h:
            raise AuxInvalid(f"aux must be {4 * code.h} bytes")
        aux = struct.unpack(f"<{code.h}I", aux)
    try:
        v = [int(c) for c in aux]
    except (TypeError, ValueError):
        raise AuxInvalid("aux is not a vector of integers") from None
    if len(v) != code.h or any(not 0 <= c < code.m for c in v):
        raise AuxInvalid(f"aux must be {code.h} residues mod {code.m}")
    return v


def query_gen(scheme, i, aux):
    if not 1 <= i <= scheme.n:
        raise IndexOutOfRange(f"index {i} outside [1, {scheme.n}]")
    return query_indices(scheme.code, i, _parse_aux(scheme, aux))


def answer(server_state, que):
    if not 0 <= que < len(server_state):
        raise IndexOutOfRange(f"query {que} outside [0, {len(server_state)})")
    return FieldElement(server_state.spec.field, server_state[que])


def reconstruct(scheme, i, aux, answers):
    if len(answers) != scheme.k:
        raise ValueError(f"expected {scheme.k} answers, got {len(answers)}")
    val = combine(scheme.code, i, _parse_aux(scheme, aux), answers)
    if val not in (0, 1):
        raise ReconstructionError(f"recovered value {val:#x} is not a bit")
    return val


def encode_database(scheme, bits):
    if len(bits) > scheme.n:
        raise ValueError(f"database has {len(bits)} bits, scheme holds {scheme.n}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("database entries must be bits")
    x = [int(b) for b in bits] + [0] * (scheme.code.n - len(bits))
    return encode(scheme.code, x)


@dataclass
class PrivacyAudit:
    identical: bool
    uniform: bool
    slots: int

    def __bool__(self):
        return self.identical


def privacy_audit(scheme, i1, i2):
    code = scheme.code
    if code.N > AUDIT_MAX_N:
        raise BudgetExceeded(f"N = {code.N} too large for exact audit")
    for i in (i1, i2):
        if not 1 <= i <= scheme.n:
            raise IndexOutOfRange(f"index {i} outside [1, {scheme.n}]")
    Q1 = all_query_indices(code, i1)
    Q2 = all_query_indices(code, i2)
    identical = uniform = True
    for a, b in zip(Q1, Q2):
        h1 = np.bincount(a, minlength=code.N)
        h2 = np.bincount(b, minlength=code.N)
        identical &= bool((h1 == h2).all())
        uniform &= bool((h1 == 1).all())
    return PrivacyAudit(identical, uniform, len(Q1))


@dataclass
class PirTranscript:
    i: int
    aux: list
    queries: list
    answers: list
    output: int
    comm_bits: int
    wire_bits: int
    t: int

    def to_json(self):
        return {
            "i": self.i,
            "aux": self.aux,
            "aux_hex": pack_aux(self.aux).hex(),
            "queries": self.queries,
            "answers": [element_hex(a, self.t) for a in self.answers],
            "output": self.output,
            "comm_bits": self.comm_bits,
            "wire_bits": self.wire_bits,
        }


def simulate(scheme, database_bits, i, seed=0, codeword=None):
    """One honest protocol run; `codeword` may carry a pre-encoded database."""
    code = scheme.code
    cw = codeword if codeword is not None else encode_database(scheme, database_bits)
    servers = [Server(cw) for _ in range(scheme.k)]
    rng = np.random.default_rng(seed)
    v = [int(c) for c in rng.integers(0, code.m, size=code.h)]
    queries = query_gen(scheme, i, v)
    replies = [srv.handle(pack_query(q)) for srv, q in zip(servers, queries)]
    answers = [unpack_answer(r) for r in replies]
    out = reconstruct(scheme, i, v, answers)
    return PirTranscript(i, v, queries, answers, out, scheme.comm_bits, scheme.wire_bits,
                         code.field.t)
