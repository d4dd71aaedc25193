"""Segmented prime sieve and smallest-prime-factor tables.

The censuses all run off one shared :class:`PrimeTable`, which bundles the
prime list, an optional smallest-prime-factor table for fast exact
factorization, and a per-table multiplicative-order cache.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from . import arith
from .errors import DomainError, RangeLimitError

SIEVE_CAP = 10**8
SPF_CAP = 10**7
_SEGMENT = 1 << 20


def sieve_primes(x: int) -> np.ndarray:
    """Ascending primes <= x as an int64 array, by segmented sieve."""
    if x < 0:
        raise DomainError(f"sieve bound must be non-negative, got {x}")
    if x > SIEVE_CAP:
        raise RangeLimitError(f"sieve bound {x} exceeds cap {SIEVE_CAP}")
    if x < 2:
        return np.empty(0, dtype=np.int64)
    root = math.isqrt(x)
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for p in range(2, math.isqrt(root) + 1):
        if base[p]:
            base[p * p :: p] = False
    base_primes = np.nonzero(base)[0]
    chunks = [base_primes[base_primes <= x]]
    lo = root + 1
    while lo <= x:
        hi = min(lo + _SEGMENT, x + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base_primes:
            p = int(p)
            start = ((lo + p - 1) // p) * p
            if start < p * p:
                start = p * p
            if start < hi:
                seg[start - lo :: p] = False
        chunks.append(np.nonzero(seg)[0] + lo)
        lo = hi
    return np.concatenate(chunks).astype(np.int64)


def spf_table(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 2 <= n <= limit (spf[0:2] = 0, 1)."""
    if limit < 1:
        raise DomainError(f"spf table limit must be >= 1, got {limit}")
    if limit > SPF_CAP:
        raise RangeLimitError(f"spf table limit {limit} exceeds cap {SPF_CAP}")
    spf = np.zeros(limit + 1, dtype=np.int64)
    if limit >= 1:
        spf[1] = 1
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            sl = spf[p::p]
            sl[sl == 0] = p
    untouched = np.nonzero(spf == 0)[0]  # primes above sqrt(limit), plus index 0
    spf[untouched] = untouched
    return spf


class PrimeTable:
    """Primes up to ``x`` plus fast factorization and order helpers."""

    def __init__(self, x: int, spf_limit: Optional[int] = None,
                 primes: Optional[np.ndarray] = None,
                 spf: Optional[np.ndarray] = None):
        self.x = x
        self.primes = sieve_primes(x) if primes is None else primes
        if spf is None:
            limit = min(x, SPF_CAP) if spf_limit is None else spf_limit
            self.spf = spf_table(max(limit, 1))
        else:
            self.spf = spf
        self.spf_limit = len(self.spf) - 1
        self._order_cache: dict[tuple[int, int], int] = {}

    def prime_list(self, x: Optional[int] = None) -> list[int]:
        """Python-int prime list, optionally truncated to a smaller bound."""
        arr = self.primes
        if x is not None:
            if x > self.x:
                raise DomainError(f"table only covers primes <= {self.x}")
            arr = arr[: int(np.searchsorted(arr, x, side="right"))]
        return arr.tolist()

    def pi(self, x: Optional[int] = None) -> int:
        if x is None:
            return len(self.primes)
        return int(np.searchsorted(self.primes, x, side="right"))

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """(prime, exponent) pairs for n >= 1; table-driven when n is in range."""
        if n < 1:
            raise DomainError(f"cannot factor {n}")
        if n > self.spf_limit:
            return list(arith.factorize(n).factors)
        out = []
        spf = self.spf
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def order(self, a: int, r: int) -> int:
        """Order of a modulo an odd prime r, descending through r - 1."""
        key = (a, r)
        cached = self._order_cache.get(key)
        if cached is not None:
            return cached
        order = r - 1
        for p, _ in self.factorize(order):
            while order % p == 0 and pow(a, order // p, r) == 1:
                order //= p
        self._order_cache[key] = order
        return order
