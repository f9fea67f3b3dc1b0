"""Integer number theory: primality, factoring, CRT, multiplicative order."""

import math
import random
import time
from functools import reduce

import gmpy2

from .errors import CrtConflict, FactorBudgetExceeded

# Deterministic Miller-Rabin for n < 2^64 (Jim Sinclair's base set).
_MR64_BASES = (2, 325, 9375, 28178, 450775, 9780504, 1795265022)
_MR_ROUNDS = 64
_MR_SEED = 0x1DC0DE
TRIAL_LIMIT = 10**6


def _small_primes(limit):
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i, v in enumerate(sieve) if v]


_PRIMES = None


def small_primes():
    global _PRIMES
    if _PRIMES is None:
        _PRIMES = _small_primes(TRIAL_LIMIT)
    return _PRIMES


def _mr_round(n, d, s, a):
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def primality(n):
    """Classify n as "composite", "proven" (n < 2^64) or "probable"."""
    if n < 2:
        return "composite"
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return "proven" if n == p else "composite"
    n = gmpy2.mpz(n)
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 2**64:
        for a in _MR64_BASES:
            a %= n
            if a and not _mr_round(n, d, s, a):
                return "composite"
        return "proven"
    rng = random.Random(_MR_SEED)
    for _ in range(_MR_ROUNDS):
        a = rng.randrange(2, int(n) - 1)
        if not _mr_round(n, d, s, a):
            return "composite"
    return "probable"


def is_prime(n):
    return primality(n) != "composite"


def pollard_brent(n, deadline=None, seed=1):
    """Return a nontrivial factor of composite n (Brent's cycle variant).

    Raises TimeoutError once `deadline` (a time.monotonic() value) passes.
    """
    if n % 2 == 0:
        return 2
    n = gmpy2.mpz(n)
    rng = random.Random(seed)
    m = 128
    while True:
        y = gmpy2.mpz(rng.randrange(1, int(n)))
        c = gmpy2.mpz(rng.randrange(1, int(n)))
        g = r = q = gmpy2.mpz(1)
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gmpy2.gcd(q, n)
                k += m
            r *= 2
            if deadline is not None and time.monotonic() > deadline:
                raise TimeoutError
        if g == n:
            # batched gcd overshot; step back one at a time
            while True:
                ys = (ys * ys + c) % n
                g = gmpy2.gcd(abs(x - ys), n)
                if g > 1:
                    break
        if g != n:
            return int(g)


def factorize(n, budget=30.0):
    """Full prime factorization of n as a sorted {prime: exponent} dict.

    Trial division to 10^6, then Pollard-Brent. Raises FactorBudgetExceeded
    (carrying the partial factorization) when `budget` seconds run out.
    """
    if n < 1:
        raise ValueError("n must be positive")
    deadline = None if budget is None else time.monotonic() + budget
    found = {}
    for p in small_primes():
        if p * p > n:
            break
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
    pending = [n] if n > 1 else []
    while pending:
        c = pending.pop()
        if is_prime(c):
            found[c] = found.get(c, 0) + 1
            continue
        r = math.isqrt(c)
        if r * r == c:
            pending += [r, r]
            continue
        try:
            d = pollard_brent(c, deadline)
        except TimeoutError:
            raise FactorBudgetExceeded(dict(sorted(found.items())), pending + [c]) from None
        pending += [d, c // d]
    return dict(sorted(found.items()))


def crt(residues, moduli):
    """Smallest nonnegative x with x = residues[i] (mod moduli[i])."""
    if len(residues) != len(moduli):
        raise ValueError("residues and moduli differ in length")
    x, M = 0, 1
    for r, m in zip(residues, moduli):
        if math.gcd(M, m) != 1:
            raise CrtConflict(f"moduli not pairwise coprime: gcd({M}, {m}) = {math.gcd(M, m)}")
        # x + M*k = r (mod m)
        k = (r - x) * pow(M, -1, m) % m
        x += M * k
        M *= m
    return x % M


def multiplicative_order(a, n, factors=None, budget=30.0):
    """Order of a in (Z/nZ)^*; `factors` is the factorization of n if known."""
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not a unit mod {n}")
    if n == 1:
        return 1
    if factors is None:
        factors = factorize(n, budget)
    # ord divides lcm(phi(p^e)) = carmichael(n)
    lam = 1
    lam_factors = {}
    for p, e in factors.items():
        phi = p ** (e - 1) * (p - 1)
        lam = lam * phi // math.gcd(lam, phi)
        for q, f in factorize(p - 1, budget).items():
            lam_factors[q] = max(lam_factors.get(q, 0), f)
        if e > 1:
            lam_factors[p] = max(lam_factors.get(p, 0), e - 1)
    order = lam
    for q in lam_factors:
        while order % q == 0 and pow(a, order // q, n) == 1:
            order //= q
    return order


def lcm(*xs):
    return reduce(lambda a, b: a * b // math.gcd(a, b), xs, 1)
