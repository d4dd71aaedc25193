"""Structure of the divisor sets behind the rank formula.

Primes are classified by k = v_2(order of p mod r); the classes with
k = 1 (odd p) and k = 2 (p = 2) form the distinguished set R_p whose
members, and only they, contribute to the unconditional rank bounds.
Integers are classified as members or non-members of the set of divisors
of the shifted powers p**n + 1.  Also houses Kummer-field degrees and the
complete-splitting prime count used by the censuses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .arith import (
    WORKING_BOUND,
    _mult_order,
    euler_phi,
    factorize,
    is_prime,
    mult_order,
    valuation,
)
from .errors import DomainError

# Rejection reasons reported by classify_up.
REJECT_SHARES_FACTOR = "shares-factor-with-p"
REJECT_MIXED_K = "mixed-k"
REJECT_TWO_PART = "excessive-two-part"
REJECT_ODD_ORDER = "odd-order-obstruction"


@dataclass(frozen=True)
class PrimeClass:
    """Class index k = v_2(order of p mod r) for an odd prime r != p."""

    p: int
    r: int
    k: int


def classify_prime(p: int, r: int) -> PrimeClass:
    """Class of the odd prime r with respect to p; k = 0 means no class."""
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if r == 2 or r == p or not is_prime(r):
        raise DomainError(f"r = {r} must be an odd prime different from p = {p}")
    order = _mult_order(p, r)
    k = 0
    while order % 2 == 0:
        order //= 2
        k += 1
    return PrimeClass(p, r, k)


def rp_class_index(p: int) -> int:
    """The class index that puts an odd prime into R_p: 1 for odd p, 2 for p = 2."""
    return 2 if p == 2 else 1


def in_R_p(p: int, r: int) -> bool:
    """Whether the odd prime r lies in R_p."""
    return classify_prime(p, r).k == rp_class_index(p)


@dataclass(frozen=True)
class UpClassification:
    """Structural membership verdict for d among divisors of p**n + 1."""

    p: int
    d: int
    member: bool
    k: Optional[int] = None
    witness_exponent: Optional[int] = None
    rejection: Optional[str] = None


def classify_up(p: int, d: int) -> UpClassification:
    """Decide membership of d by the structure of its prime factorization.

    Membership requires gcd(d, p) = 1, a common class k >= 1 across all odd
    prime factors, and a bounded power of two: v_2(d) <= v_2(p+1) when k = 1
    and v_2(d) <= 1 when k > 1 (for odd p; even d never qualifies for p = 2).
    Member verdicts carry the minimal exponent n with d | p**n + 1.
    """
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    if d == 1:
        return UpClassification(p, 1, True, None, 1, None)
    if math.gcd(d, p) != 1:
        return UpClassification(p, d, False, rejection=REJECT_SHARES_FACTOR)

    f = factorize(d)
    v2d = 0
    ks = set()
    for r, e in f:
        if r == 2:
            v2d = e
            continue
        ks.add(classify_prime(p, r).k)
    if 0 in ks:
        return UpClassification(p, d, False, rejection=REJECT_ODD_ORDER)
    if len(ks) > 1:
        return UpClassification(p, d, False, rejection=REJECT_MIXED_K)
    # Pure powers of two ride along with the k = 1 class.
    k = ks.pop() if ks else 1

    if p > 2:
        cap = valuation(2, p + 1) if k == 1 else 1
        if v2d > cap:
            return UpClassification(p, d, False, rejection=REJECT_TWO_PART)

    if d == 2:
        witness = 1
    else:
        # The order of p mod d is even for every structural member with
        # d > 2, and the least n with d | p**n + 1 is half of it.
        witness = _mult_order(p, d) // 2
    return UpClassification(p, d, True, k, witness, None)


def member_up_direct_oracle(p: int, d: int) -> bool:
    """Membership straight from the defining divisibility d | p**n + 1.

    Independent of classify_up: uses only the order of p mod d and one
    modular power.
    """
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if d < 1 or d > WORKING_BOUND:
        raise DomainError(f"d out of range: {d}")
    if d == 1:
        return True
    if d == 2:
        return p != 2
    if math.gcd(d, p) != 1:
        return False
    order = _mult_order(p, d)
    if order % 2:
        return False
    return pow(p, order // 2, d) == d - 1


def in_Q_pm(p: int, m: int, r: int) -> bool:
    """Whether the prime r lies in R_p and satisfies r == 1 (mod m)."""
    if m < 1 or m % 2 == 0:
        raise DomainError(f"m must be odd and positive, got {m}")
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if m % p == 0:
        raise DomainError(f"m = {m} must not be divisible by p = {p}")
    if not is_prime(r):
        raise DomainError(f"r = {r} is not prime")
    if r == 2 or r == p:
        return False
    return r % m == 1 and in_R_p(p, r)


def _power_root_height(a: int) -> int:
    """Largest h with a = b**h for an integer b (|a| > 1)."""
    aa = abs(a)
    g = 0
    for _, e in factorize(aa):
        g = math.gcd(g, e)
    if a < 0:
        while g % 2 == 0:
            g //= 2
    return g


def _squarefree_part(a: int) -> int:
    """a1 in a = a1 * a2**2 with a1 squarefree; the sign rides on a1."""
    out = 1
    for prime, e in factorize(abs(a)):
        if e % 2:
            out *= prime
    return -out if a < 0 else out


def kummer_degree(p: int, n: int, d: int) -> int:
    """Degree of the field generated by the n-th roots of unity and p**(1/d).

    d must divide n.  The degree is d*phi(n), halved exactly when d is even
    and either p | n with p == 1 (mod 4), or 4p | n with p != 1 (mod 4).
    """
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    return kummer_degree_general(p, n, d)


def kummer_degree_general(a: int, n: int, d: int) -> int:
    """Same degree computation for any integer a with |a| > 1, gcd(d, h) = 1."""
    if abs(a) < 2:
        raise DomainError(f"need |a| > 1, got {a}")
    if n < 1 or d < 1 or n % d != 0:
        raise DomainError(f"d = {d} must divide n = {n}")
    h = _power_root_height(a)
    if math.gcd(d, h) != 1:
        raise DomainError(f"gcd(d, h) = gcd({d}, {h}) != 1")
    a1 = _squarefree_part(a)
    halve = d % 2 == 0 and (
        (n % abs(a1) == 0 and a1 % 4 == 1)
        or (n % (4 * abs(a1)) == 0 and a1 % 4 != 1)
    )
    degree = d * euler_phi(n)
    return degree // 2 if halve else degree


@lru_cache(maxsize=1 << 16)
def _order_v2_cached(p: int, r: int) -> int:
    t = r - 1
    s = (t & -t).bit_length() - 1
    t >>= s
    b = pow(p, t, r)
    if b == 1:
        return 0
    c = 0
    while b != 1:
        b = b * b % r
        c += 1
    return c


def order_two_valuation(p: int, r: int) -> int:
    """v_2 of the order of p mod r, for an odd prime r not dividing p.

    One modular power plus at most v_2(r-1) squarings; used by the censuses
    where the full order is not needed.
    """
    if r % p == 0:
        raise DomainError(f"r = {r} divides the base p = {p}")
    return _order_v2_cached(p, r)


def varpi_count(p: int, x: int, n: int, d: int, primes: Iterable[int]) -> int:
    """Number of primes r <= x with r == 1 (mod n) and d | (r-1)/order(p mod r).

    These are the primes splitting completely in the degree-d Kummer layer
    over the n-th cyclotomic field.  ``primes`` is an injected ascending
    prime stream covering [2, x]; r = p is skipped.
    """
    if n < 1 or d < 1 or n % d != 0:
        raise DomainError(f"d = {d} must divide n = {n}")
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    count = 0
    for r in primes:
        if r > x:
            break
        if r == p or (r - 1) % n:
            continue
        order = _mult_order(p, r)
        if ((r - 1) // order) % d == 0:
            count += 1
    return count
