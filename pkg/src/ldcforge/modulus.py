"""Number theory for a composite modulus m = p_1 ... p_r.

Profiles (factorization, order of 2, canonical residues, cyclotomic cosets),
CRT, the Mersenne semiprime scanner and its published reference rows.
"""

import itertools
import math
import time
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import ntheory
from .errors import BudgetExceeded, FactorBudgetExceeded, InvalidModulus
from .ntheory import crt, is_prime, primality  # noqa: F401  (re-exported)

FACTOR_BUDGET = 30.0
COSET_LIMIT = 10**7

# Fifty Mersenne numbers 2^t - 1 = p*q (t, p, q prime) with their smaller
# prime factor p, as published for the set M_{2,Mersenne}.
MERSENNE_SEMIPRIMES = {
    11: 23,
    23: 47,
    37: 223,
    41: 13367,
    59: 179951,
    67: 193707721,
    83: 167,
    97: 11447,
    101: 7432339208719,
    103: 2550183799,
    109: 745988807,
    131: 263,
    137: 32032215596496435569,
    139: 5625767248687,
    149: 86656268566282183151,
    167: 2349023,
    197: 7487,
    199: 164504919713,
    227: 26986333437777017,
    241: 22000409,
    269: 13822297,
    271: 15242475217,
    281: 80929,
    293: 40122362455616221971122353,
    347: 14143189112952632419639,
    373: 25569151,
    379: 180818808679,
    421: 614002928307599,
    457: 150327409,
    487: 4871,
    523: 160188778313202118610543685368878688932828701136501444932217468039063,
    727: int(
        "176062917118154340379348818723316116707774911664453004727494494365756"
        "22328171096762265466521858927"
    ),
    809: 4148386731260605647525186547488842396461625774241327567978137,
    881: 26431,
    971: 23917104973173909566916321016011885041962486321502513,
    983: 1808226257914551209964473260866417929207023,
    997: 167560816514084819488737767976263150405095191554732902607,
    1063: 1485761479,
    1427: 19054580564725546974193126830978590503,
    1487: 24464753918382797416777,
    1637: 81679753,
    2927: 1217183584262023230020873,
    3079: 25324846649810648887383180721,
    3259: 21926805872270062496819221124452121,
    3359: 6719,
    4243: 101833,
    4729: 61944189981415866671112479477273,
    5689: 919724609777,
    6043: 11155520642419038056369903183,
    7331: 458072843161,
}


def _order_of_two(primes):
    m = math.prod(primes)
    if (m + 1) & m == 0:
        # m = 2^k - 1
        return m.bit_length()
    return ntheory.lcm(*(ntheory.multiplicative_order(2, p, {p: 1}) for p in primes))


@dataclass(frozen=True)
class ModulusProfile:
    m: int
    primes: tuple
    t: int
    canonical: tuple

    @property
    def r(self):
        return len(self.primes)

    def residue(self, pattern):
        """Canonical residue s with s = pattern[i] (mod primes[i])."""
        return crt(list(pattern), list(self.primes))

    @property
    def s01(self):
        """For r = 2: 0 mod the smaller prime, 1 mod the larger."""
        self._need_two()
        return self.residue((0, 1))

    @property
    def s10(self):
        self._need_two()
        return self.residue((1, 0))

    def _need_two(self):
        if self.r != 2:
            raise InvalidModulus(f"{self.m} has {self.r} prime factors, expected 2")

    @cached_property
    def cosets(self):
        return cyclotomic_cosets(self.m)

    def to_json(self):
        return {
            "m": str(self.m),
            "primes": [str(p) for p in self.primes],
            "t": self.t,
            "canonical": [str(s) for s in self.canonical],
        }


@lru_cache(maxsize=256)
def profile(m, budget=FACTOR_BUDGET):
    m = int(m)
    if m < 3 or m % 2 == 0:
        raise InvalidModulus(f"{m} is not an odd integer > 1")
    factors = ntheory.factorize(m, budget)
    if any(e > 1 for e in factors.values()):
        raise InvalidModulus(f"{m} is not squarefree: {factors}")
    if len(factors) < 2:
        raise InvalidModulus(f"{m} is prime")
    primes = tuple(sorted(factors))
    canonical = sorted(
        crt(list(sigma), list(primes))
        for sigma in itertools.product((0, 1), repeat=len(primes))
        if any(sigma)
    )
    return ModulusProfile(m, primes, _order_of_two(primes), tuple(canonical))


def cyclotomic_cosets(m):
    """Partition of Z_m into orbits of x -> 2x, keyed by minimal member."""
    if m % 2 == 0:
        raise InvalidModulus(f"cyclotomic cosets of 2 need odd m, got {m}")
    if m > COSET_LIMIT:
        raise BudgetExceeded(f"coset partition of m = {m} exceeds {COSET_LIMIT} elements")
    seen = bytearray(m)
    cosets = {}
    for s in range(m):
        if seen[s]:
            continue
        members = []
        x = s
        while not seen[x]:
            seen[x] = 1
            members.append(x)
            x = 2 * x % m
        cosets[s] = sorted(members)
    return cosets


def coset_representatives(m, t, units_only=False):
    """Sorted minimal coset representatives as an int64 array (vectorized)."""
    if m > 2**40:
        raise BudgetExceeded(f"m = {m} too large for representative enumeration")
    x = np.arange(m, dtype=np.int64)
    best = x.copy()
    y = x.copy()
    for _ in range(t - 1):
        y = (y * 2) % m
        np.minimum(best, y, out=best)
    reps = np.flatnonzero(best == x)
    if units_only:
        reps = reps[np.gcd(reps, m) == 1]
    return reps


@dataclass
class Factorization:
    n: int
    factors: dict
    complete: bool = True

    @property
    def semiprime(self):
        return self.complete and len(self.factors) == 2 and all(e == 1 for e in self.factors.values())

    @property
    def pq(self):
        if not self.semiprime:
            return None
        return tuple(sorted(self.factors))

    @property
    def prime_count(self):
        return sum(self.factors.values())


def factor_semiprime(n, budget=FACTOR_BUDGET, full=True):
    """Factor n; the result's `pq` is (p, q) exactly when n = p*q.

    With full=False the search stops as soon as n is known to have three or
    more prime factors (the result is then marked incomplete).
    """
    n = int(n)
    if n < 3:
        raise ValueError("n must be >= 3")
    if full:
        return Factorization(n, ntheory.factorize(n, budget))
    deadline = time.monotonic() + budget
    if is_prime(n):
        return Factorization(n, {n: 1})
    d = None
    for p in ntheory.small_primes():
        if p * p > n:
            break
        if n % p == 0:
            d = p
            break
    if d is None:
        r = math.isqrt(n)
        if r * r == n:
            d = r
        else:
            try:
                d = ntheory.pollard_brent(n, deadline)
            except TimeoutError:
                raise FactorBudgetExceeded({}, [n]) from None
    a, b = sorted((d, n // d))
    if is_prime(a) and is_prime(b):
        return Factorization(n, {a: 1, b: 1} if a != b else {a: 2})
    return Factorization(n, {a: 1, b: 1}, complete=False)


@dataclass(frozen=True)
class MersenneRow:
    t: int
    m: int
    p: int
    q: int
    p_primality: str = "proven"
    q_primality: str = "proven"

    def to_json(self):
        return {
            "t": self.t,
            "m": str(self.m),
            "p": str(self.p),
            "q": str(self.q),
            "p_primality": self.p_primality,
            "q_primality": self.q_primality,
        }

    @classmethod
    def from_json(cls, d):
        return cls(int(d["t"]), int(d["m"]), int(d["p"]), int(d["q"]),
                   d.get("p_primality", "proven"), d.get("q_primality", "proven"))


@dataclass
class ScanResult:
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (t, reason)

    def to_json(self):
        return {
            "rows": [r.to_json() for r in self.rows],
            "skipped": [{"t": t, "reason": why} for t, why in self.skipped],
        }


def _scan_one(t, budget):
    m = (1 << t) - 1
    if is_prime(m):
        return None, "prime"
    try:
        f = factor_semiprime(m, budget, full=False)
    except FactorBudgetExceeded:
        return None, f"budget exceeded ({budget}s)"
    if not f.semiprime:
        return None, "more than two prime factors"
    p, q = f.pq
    return MersenneRow(t, m, p, q, primality(p), primality(q)), None


def scan_mersenne(t_min, t_max, budget_per_t=FACTOR_BUDGET, workers=1):
    """Rows for prime t in [t_min, t_max] where 2^t - 1 is a product of two primes."""
    if t_min > t_max:
        raise ValueError("t_min > t_max")
    ts = [t for t in range(max(t_min, 2), t_max + 1) if is_prime(t)]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            outcomes = list(pool.map(_scan_one, ts, [budget_per_t] * len(ts)))
    else:
        outcomes = [_scan_one(t, budget_per_t) for t in ts]
    result = ScanResult()
    for t, (row, why) in zip(ts, outcomes):
        if row is not None:
            result.rows.append(row)
        else:
            result.skipped.append((t, why))
    return result


def pairwise_coprime(ms):
    """(True, None) if all pairs are coprime, else (False, (a, b, gcd))."""
    ms = [int(x) for x in ms]
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            g = math.gcd(ms[i], ms[j])
            if g != 1:
                return False, (ms[i], ms[j], g)
    return True, None


def check_published_row(t, p, budget=FACTOR_BUDGET):
    """Re-check one published row: p | 2^t - 1 and both cofactors prime.

    Returns a dict of per-check outcomes.
    """
    m = (1 << t) - 1
    divides = m % p == 0
    q = m // p if divides else None
    return {
        "t": t,
        "t_prime": is_prime(t),
        "divides": divides,
        "p": str(p),
        "p_primality": primality(p),
        "q": str(q) if q is not None else None,
        "q_primality": primality(q) if q is not None else None,
        "p_smaller": bool(divides and p < q),
    }
