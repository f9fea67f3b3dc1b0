"""Arithmetic in binary extension fields GF(2^t).

Elements are plain Python ints holding the coefficient bit-vector in the
polynomial basis (bit i = coefficient of gamma^i).  ``FieldSpec`` offers the
raw int kernels; ``FieldElement`` wraps them with operators.  Two bulk
engines back the hot loops elsewhere in the package:

* ``Spread``: elements stored with one coefficient per W-bit slot in a
  gmpy2 integer, so a carry-less product is a single native multiply
  followed by a parity mask.  Works for any t.
* ``FieldTables``: numpy exp/log tables for t <= TABLE_MAX_T.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache

import gmpy2
import numpy as np

from . import ntheory
from .errors import (
    BudgetExceeded,
    DivisionByZero,
    FieldMismatch,
    InternalError,
    IrreducibleViolation,
    OrderBudgetExceeded,
    OrderUnsupported,
)

TABLE_MAX_T = 24
ORDER_BUDGET = 10.0

# Moduli pinned so published field values can be checked bit-for-bit.
BUILTIN_MODULI = {
    4: (1 << 4) | (1 << 1) | 1,
    9: (1 << 9) | (1 << 4) | 1,
    11: (1 << 11) | (1 << 2) | 1,
    23: (1 << 23) | (1 << 5) | 1,
}


# ---------- GF(2)[X] on ints ----------

def clmul(a, b):
    """Carry-less product of two bit-vectors."""
    if a.bit_count() < b.bit_count():
        a, b = b, a
    if b.bit_length() <= 64 or b.bit_count() < 24:
        r = 0
        while b:
            low = b & -b
            r ^= a * low
            b ^= low
        return r
    tab = [0] * 16
    for k in range(1, 16):
        hb = k.bit_length() - 1
        tab[k] = tab[k ^ (1 << hb)] ^ (a << hb)
    r, s = 0, 0
    while b:
        r ^= tab[b & 15] << s
        b >>= 4
        s += 4
    return r


def clsqr(a):
    """Square in GF(2)[X]: bit i moves to bit 2i."""
    return int(format(a, "b"), 4) if a else 0


def poly_divmod(a, b):
    if b == 0:
        raise DivisionByZero("polynomial division by zero")
    db = b.bit_length()
    q = 0
    while a.bit_length() >= db:
        s = a.bit_length() - db
        q |= 1 << s
        a ^= b << s
    return q, a


def poly_mod(a, b):
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def poly_gcd(a, b):
    while b:
        a, b = b, poly_mod(a, b)
    return a


def poly_str(f):
    terms = []
    for i in range(f.bit_length() - 1, -1, -1):
        if f >> i & 1:
            terms.append("1" if i == 0 else "X" if i == 1 else f"X^{i}")
    return " + ".join(terms) or "0"


def _prime_divisors(n):
    return list(ntheory.factorize(n, None))


def _make_reducer(f):
    t = f.bit_length() - 1
    low = f ^ (1 << t)
    mask = (1 << t) - 1
    if low.bit_length() * 2 <= t:
        shifts = [i for i in range(low.bit_length()) if low >> i & 1]

        def reduce(x):
            while x >> t:
                hi = x >> t
                x &= mask
                for s in shifts:
                    x ^= hi << s
            return x
    else:
        def reduce(x):
            return poly_mod(x, f)
    return reduce


@lru_cache(maxsize=None)
def _small_factor_product(d):
    # product of X^(2^k) + X for k <= d: every irreducible of degree <= d divides it
    p = 1
    for k in range(1, d + 1):
        p = clmul(p, (1 << (1 << k)) | 2)
    return p


def is_irreducible(f):
    """Rabin's irreducibility test over GF(2)."""
    t = f.bit_length() - 1
    if t < 1:
        return False
    if t == 1:
        return True
    if not f & 1 or f.bit_count() % 2 == 0:
        return False
    d = min(10, t // 2)
    if d >= 2 and poly_gcd(f, _small_factor_product(d)) != 1:
        return False
    reduce = _make_reducer(f)
    x = 2
    powers = {}
    for k in range(1, t + 1):
        x = reduce(int(format(x, "b"), 4))
        powers[k] = x
    if powers[t] != 2:
        return False
    for r in _prime_divisors(t):
        if poly_gcd(f, powers[t // r] ^ 2) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def smallest_irreducible(t):
    """Degree-t irreducible with the smallest coefficient bit-string value."""
    if t == 1:
        return 0b10
    base = 1 << t
    for low in range(1, base, 2):
        if is_irreducible(base | low):
            return base | low
    raise InternalError(f"no irreducible polynomial of degree {t}")


# ---------- fields ----------

@dataclass(frozen=True)
class FieldSpec:
    t: int
    modulus: int

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be positive")
        if self.modulus.bit_length() != self.t + 1:
            raise IrreducibleViolation(f"modulus {self.modulus:#x} does not have degree {self.t}")
        if self.t > 1 and not self.modulus & 1:
            raise IrreducibleViolation("modulus has zero constant term")

    @property
    def size(self):
        return 1 << self.t

    @property
    def group_order(self):
        return (1 << self.t) - 1

    @cached_property
    def _reduce(self):
        return _make_reducer(self.modulus)

    def reduce(self, x):
        return self._reduce(x)

    def add(self, a, b):
        return a ^ b

    def mul(self, a, b):
        if not a or not b:
            return 0
        return self._reduce(clmul(a, b))

    def sqr(self, a):
        return self._reduce(clsqr(a))

    def inv(self, a):
        if a == 0:
            raise DivisionByZero("inverse of zero")
        # extended Euclid: track s with s*a = r (mod modulus)
        r0, r1 = self.modulus, a
        s0, s1 = 0, 1
        while r1 != 1:
            q, r = poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 ^ clmul(q, s1)
            if r1 == 0:
                raise InternalError("modulus is not irreducible")
        return self._reduce(s1)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise DivisionByZero("negative power of zero")
            return 0
        e %= self.group_order
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.sqr(base)
        return result

    def frob(self, a, j):
        for _ in range(j % self.t):
            a = self.sqr(a)
        return a

    def __call__(self, coeffs):
        return FieldElement(self, self._check(coeffs))

    def _check(self, c):
        c = int(c)
        if c < 0 or c.bit_length() > self.t:
            raise ValueError(f"{c:#x} is not an element of GF(2^{self.t})")
        return c

    @property
    def zero(self):
        return FieldElement(self, 0)

    @property
    def one(self):
        return FieldElement(self, 1)

    @property
    def gen(self):
        """The class of X, written gamma in the polynomial basis."""
        return FieldElement(self, self._reduce(2))

    # serialization
    def hex(self, c):
        return element_hex(c, self.t)

    def from_hex(self, s):
        return self._check(element_from_hex(s, self.t))

    def to_json(self):
        return {"t": self.t, "modulus_hex": format(self.modulus, "x")}

    @classmethod
    def from_json(cls, d):
        return field_create(d["t"], int(d["modulus_hex"], 16))

    def __repr__(self):
        return f"GF(2^{self.t}) mod {poly_str(self.modulus)}"

    @cached_property
    def spread(self):
        return Spread(self)

    @cached_property
    def tables(self):
        if self.t > TABLE_MAX_T:
            raise BudgetExceeded(f"log tables only for t <= {TABLE_MAX_T}")
        return FieldTables(self)

    def order_factors(self, budget=ORDER_BUDGET):
        return _group_order_factors(self.t, budget)


def element_hex(c, t):
    """Lowercase hex, least-significant 64-bit word first, ceil(t/4) digits."""
    digits = -(-t // 4)
    if t <= 64:
        return format(c, f"0{digits}x")
    words = []
    while digits > 0:
        d = min(16, digits)
        words.append(format(c & ((1 << 64) - 1), f"0{d}x"))
        c >>= 64
        digits -= d
    return "".join(words)


def element_from_hex(s, t):
    if t <= 64:
        return int(s, 16)
    c, shift = 0, 0
    while s:
        word, s = s[:16], s[16:]
        c |= int(word, 16) << shift
        shift += 64
    return c


_ORDER_CACHE = {}


def _group_order_factors(t, budget):
    if t not in _ORDER_CACHE:
        try:
            _ORDER_CACHE[t] = ntheory.factorize((1 << t) - 1, budget)
        except ntheory.FactorBudgetExceeded as exc:
            raise OrderBudgetExceeded(f"cannot factor 2^{t}-1 within {budget}s") from exc
    return _ORDER_CACHE[t]


@lru_cache(maxsize=None)
def _field(t, modulus):
    return FieldSpec(t, modulus)


def field_create(t, modulus_override=None):
    """GF(2^t) with the override modulus, the pinned modulus, or the smallest irreducible."""
    if t < 1:
        raise ValueError("t must be positive")
    if modulus_override is not None:
        f = int(modulus_override)
        if f.bit_length() != t + 1:
            raise IrreducibleViolation(f"override has degree {f.bit_length() - 1}, expected {t}")
        if not is_irreducible(f):
            raise IrreducibleViolation(f"{poly_str(f)} is reducible")
        return _field(t, f)
    if t in BUILTIN_MODULI:
        return _field(t, BUILTIN_MODULI[t])
    return _field(t, smallest_irreducible(t))


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    coeffs: int

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
            return other.coeffs
        if isinstance(other, int) and other in (0, 1):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.field, self.coeffs ^ o)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.field, self.field.mul(self.coeffs, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.field, self.field.div(self.coeffs, o))

    def __pow__(self, e):
        return FieldElement(self.field, self.field.pow(self.coeffs, e))

    def __neg__(self):
        return self

    def inv(self):
        return FieldElement(self.field, self.field.inv(self.coeffs))

    def __bool__(self):
        return self.coeffs != 0

    def __int__(self):
        return self.coeffs

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == other
        return NotImplemented

    def __hash__(self):
        return hash((self.field.t, self.field.modulus, self.coeffs))

    def hex(self):
        return self.field.hex(self.coeffs)

    def __repr__(self):
        return f"<{self.hex()} in GF(2^{self.field.t})>"


def fe_op(kind, x, y=None):
    """Dispatch add/mul/inv/pow on field elements."""
    if kind == "add":
        return x + y
    if kind == "mul":
        return x * y
    if kind == "inv":
        return x.inv()
    if kind == "pow":
        return x ** int(y)
    raise ValueError(f"unknown field op {kind!r}")


def frobenius(x, j):
    """x^(2^j), j reduced mod t."""
    return FieldElement(x.field, x.field.frob(x.coeffs, j))


def element_order(x, budget=ORDER_BUDGET):
    """Least l >= 1 with x^l = 1."""
    F = x.field
    c = x.coeffs if isinstance(x, FieldElement) else x
    if c == 0:
        raise DivisionByZero("zero has no multiplicative order")
    factors = _group_order_factors(F.t, budget)
    order = F.group_order
    for p, e in factors.items():
        for _ in range(e):
            if F.pow(c, order // p) == 1:
                order //= p
            else:
                break
    return order


def primitive_root(field, m):
    """Deterministic element of order exactly m.

    Scans g = 2, 3, ... in bit-string order and returns the first
    g^((2^t-1)/m) whose order is m.  Only the factorization of m is needed.
    """
    q1 = field.group_order
    if m < 1 or q1 % m:
        raise OrderUnsupported(f"{m} does not divide 2^{field.t} - 1")
    return FieldElement(field, _primitive_root(field, m))


@lru_cache(maxsize=None)
def _primitive_root(field, m):
    if m == 1:
        return 1
    q1 = field.group_order
    primes = list(ntheory.factorize(m, None))
    cof = q1 // m
    for g in range(2, field.size):
        y = field.pow(g, cof)
        if y == 1:
            continue
        if all(field.pow(y, m // p) != 1 for p in primes):
            return y
    raise InternalError(f"no element of order {m} found")


# ---------- bulk engines ----------

_TO01 = bytes.maketrans(b"01", b"\x00\x01")
_FROM01 = bytes.maketrans(b"\x00\x01", b"01")


class Spread:
    """Field arithmetic on slot-spread gmpy2 integers.

    Slot width W satisfies 2^W > t, so the integer product of two spread
    elements holds each coefficient count in its own slot; its parity is the
    carry-less product.
    """

    def __init__(self, field):
        self.field = field
        t = self.t = field.t
        self.W = 8 if t < 256 else 16
        W = self.W
        unit = b"\x01" if W == 8 else b"\x01\x00"
        self.parity = gmpy2.mpz(int.from_bytes(unit * (2 * t), "little"))
        self.top = W * t
        self.lowmask = (gmpy2.mpz(1) << self.top) - 1
        low = field.modulus ^ (1 << t)
        self.shifts = [W * i for i in range(low.bit_length()) if low >> i & 1]
        self.one = self.to(1)
        self.zero = gmpy2.mpz(0)

    def to(self, x):
        if not x:
            return gmpy2.mpz(0)
        s = format(x, "b").encode().translate(_TO01)
        if self.W == 8:
            return gmpy2.mpz(int.from_bytes(s, "big"))
        buf = bytearray(2 * len(s))
        buf[1::2] = s
        return gmpy2.mpz(int.from_bytes(buf, "big"))

    def back(self, y):
        if not y:
            return 0
        y = int(y)
        if self.W == 8:
            n = (y.bit_length() + 7) // 8
            b = y.to_bytes(n, "big")
        else:
            n = (y.bit_length() + 15) // 16
            b = y.to_bytes(2 * n, "big")[1::2]
        return int(b.translate(_FROM01), 2)

    def _fold(self, p):
        top, lowmask, shifts = self.top, self.lowmask, self.shifts
        while p >> top:
            hi = p >> top
            p &= lowmask
            for s in shifts:
                p ^= hi << s
        return p

    def mul(self, a, b):
        return self._fold((a * b) & self.parity)

    def sqr(self, a):
        return self._fold((a * a) & self.parity)

    def pow(self, a, e):
        e %= self.field.group_order
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, a)
            e >>= 1
            if e:
                a = self.sqr(a)
        return result

    def inv(self, a):
        return self.to(self.field.inv(self.back(a)))

    def batch_inv(self, xs):
        """Inverses of nonzero spread elements with one field inversion."""
        n = len(xs)
        if n == 0:
            return []
        prefix = [None] * n
        acc = self.one
        for i, x in enumerate(xs):
            prefix[i] = acc
            acc = self.mul(acc, x)
        inv_acc = self.inv(acc)
        out = [None] * n
        for i in range(n - 1, -1, -1):
            out[i] = self.mul(inv_acc, prefix[i])
            inv_acc = self.mul(inv_acc, xs[i])
        return out


def _vec_clmul_const(arr, c, field):
    """arr * c for a uint64 array of elements and a constant c (t <= 31)."""
    acc = np.zeros_like(arr)
    i = 0
    while c:
        if c & 1:
            acc ^= arr << np.uint64(i)
        c >>= 1
        i += 1
    t = field.t
    f = np.uint64(field.modulus)
    for b in range(2 * t - 2, t - 1, -1):
        bit = (acc >> np.uint64(b)) & np.uint64(1)
        acc ^= bit * (f << np.uint64(b - t))
    return acc


class FieldTables:
    """exp/log tables relative to the smallest generator of GF(2^t)^*."""

    def __init__(self, field):
        self.field = field
        q1 = self.q1 = field.group_order
        self.generator = _smallest_generator(field)
        exp = np.empty(q1, dtype=np.uint64)
        exp[0] = 1
        n = 1
        while n < q1:
            step = min(n, q1 - n)
            gn = field.pow(self.generator, n)
            exp[n : n + step] = _vec_clmul_const(exp[:step], gn, field)
            n += step
        self.exp = exp.astype(np.int64)
        log = np.full(q1 + 1, -1, dtype=np.int64)
        log[self.exp] = np.arange(q1, dtype=np.int64)
        self.log = log

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        r = self.exp[(self.log[a] + self.log[b]) % self.q1]
        return np.where((a == 0) | (b == 0), 0, r)

    def power_of(self, log_value):
        """Elements generator^log_value for an integer array."""
        return self.exp[np.asarray(log_value, dtype=np.int64) % self.q1]


def _smallest_generator(field):
    factors = _group_order_factors(field.t, None)
    q1 = field.group_order
    for g in range(2, field.size):
        if all(field.pow(g, q1 // p) != 1 for p in factors):
            return g
    if q1 == 1:
        return 1
    raise InternalError("no generator found")
