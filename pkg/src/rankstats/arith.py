"""Exact integer arithmetic primitives.

Everything here is pure, deterministic, and dependency-free.  Scalar inputs
are confined to the 64-bit-class range (``WORKING_BOUND``) so that results
stay exact at the scales the rest of the package works at; larger inputs
raise :class:`RangeLimitError` up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError, RangeLimitError

WORKING_BOUND = 2**63 - 1

# Deterministic Miller-Rabin witness set; sound for every n < 3.3 * 10**24,
# comfortably past the working bound.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _small_primes(limit: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * limit
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = b"\x00" * len(range(p * p, limit, p))
    return tuple(i for i in range(limit) if sieve[i])


_TRIAL_PRIMES = _small_primes(1024)


def is_prime(n: int) -> bool:
    """Deterministic primality test for 0 <= n <= WORKING_BOUND."""
    if n > WORKING_BOUND:
        raise RangeLimitError(f"{n} exceeds the working bound")
    if n < 2:
        return False
    for p in _TRIAL_PRIMES[:32]:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int) -> int:
    """Deterministic Brent-cycle rho; returns a nontrivial factor of odd composite n."""
    for c in range(1, 64):
        y, r, q = 2, 1, 1
        g, x, ys = 1, 0, 2
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += 128
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"rho failed to split {n}")  # unreachable in the working range


@dataclass(frozen=True)
class Factorization:
    """Canonical prime factorization: value == prod(p**e), primes ascending."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        prev = 1
        for p, e in self.factors:
            if p <= prev or e < 1 or not is_prime(p):
                raise DomainError(f"invalid factor list for {self.value}")
            prev = p
            prod *= p**e
        if prod != self.value or self.value < 1:
            raise DomainError(f"factor list does not multiply back to {self.value}")

    def __iter__(self):
        return iter(self.factors)


def factorize(n: int) -> Factorization:
    """Canonical factorization of 1 <= n <= WORKING_BOUND; factorize(1) is empty."""
    if n < 1:
        raise DomainError(f"cannot factor {n}; need n >= 1")
    if n > WORKING_BOUND:
        raise RangeLimitError(f"{n} exceeds the working bound")
    m = n
    out: dict[int, int] = {}
    for p in _TRIAL_PRIMES:
        if p * p > m:
            break
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
    if m > 1:
        if m < _TRIAL_PRIMES[-1] ** 2 or is_prime(m):
            out[m] = out.get(m, 0) + 1
        else:
            stack = [m]
            while stack:
                v = stack.pop()
                if is_prime(v):
                    out[v] = out.get(v, 0) + 1
                    continue
                g = _brent_rho(v)
                stack.append(g)
                stack.append(v // g)
    return Factorization(n, tuple(sorted(out.items())))


def _as_factorization(n: int | Factorization) -> Factorization:
    return n if isinstance(n, Factorization) else factorize(n)


def euler_phi(n: int | Factorization) -> int:
    """Euler's totient, multiplicatively from the factorization."""
    f = _as_factorization(n)
    out = 1
    for p, e in f:
        out *= p ** (e - 1) * (p - 1)
    return out


def _lambda_prime_power(p: int, e: int) -> int:
    if p == 2:
        if e == 1:
            return 1
        if e == 2:
            return 2
        return 2 ** (e - 2)
    return p ** (e - 1) * (p - 1)


def carmichael_lambda(n: int | Factorization) -> int:
    """Carmichael's function: the exponent of the unit group mod n."""
    f = _as_factorization(n)
    out = 1
    for p, e in f:
        out = math.lcm(out, _lambda_prime_power(p, e))
    return out


@dataclass(frozen=True)
class OrderRecord:
    """base**order == 1 (mod modulus) with order minimal."""

    base: int
    modulus: int
    order: int


@lru_cache(maxsize=1 << 16)
def _mult_order(a: int, n: int) -> int:
    if n == 1:
        return 1
    order = carmichael_lambda(n)
    for p, _ in factorize(order):
        while order % p == 0 and pow(a, order // p, n) == 1:
            order //= p
    return order


def mult_order(a: int, n: int) -> OrderRecord:
    """Multiplicative order of a modulo n, for gcd(a, n) == 1.

    Computed by factoring lambda(n) and stripping prime factors, never by
    linear search.
    """
    if a < 2:
        raise DomainError(f"order base must be >= 2, got {a}")
    if n < 1:
        raise DomainError(f"modulus must be positive, got {n}")
    if n > WORKING_BOUND:
        raise RangeLimitError(f"{n} exceeds the working bound")
    if math.gcd(a, n) != 1:
        raise DomainError(f"gcd({a}, {n}) != 1; order undefined")
    return OrderRecord(a, n, _mult_order(a, n))


def valuation(l: int, n: int) -> int:
    """Largest e with l**e | n, for l prime and n >= 1."""
    if not is_prime(l):
        raise DomainError(f"valuation base {l} is not prime")
    if n < 1:
        raise DomainError(f"valuation of {n} undefined; need n >= 1")
    e = 0
    while n % l == 0:
        n //= l
        e += 1
    return e


def divisors(n: int | Factorization) -> list[int]:
    """All divisors of n, ascending."""
    f = _as_factorization(n)
    out = [1]
    for p, e in f:
        out = [d * p**k for d in out for k in range(e + 1)]
    out.sort()
    return out


def largest_prime_factor(n: int) -> int:
    """P(n): largest prime factor of n, with P(1) = 1."""
    f = _as_factorization(n)
    return f.factors[-1][0] if f.factors else 1


def legendre_symbol(u: int, p: int) -> int:
    """Legendre symbol (u/p) for odd prime p, via Euler's criterion."""
    if p == 2 or not is_prime(p):
        raise DomainError(f"Legendre symbol needs an odd prime modulus, got {p}")
    t = pow(u % p, (p - 1) // 2, p)
    if t == p - 1:
        return -1
    return t


def lcm_upto(y: int) -> int:
    """Least common multiple of 1..y; raises RangeLimitError past the working bound."""
    if y < 1:
        raise DomainError(f"lcm range needs y >= 1, got {y}")
    out = 1
    for i in range(2, y + 1):
        out = out // math.gcd(out, i) * i
        if out > WORKING_BOUND:
            raise RangeLimitError(f"lcm(1..{y}) exceeds the working bound")
    return out
