"""The rank invariant and certified rank brackets.

For d coprime to q the invariant is the divisor sum of phi(e) over the
order of q mod e; for qualifying d the curve rank sits in the bracket
[max(0, invariant - 4), invariant].  An orbit-counting oracle (cyclotomic
cosets of multiplication by q on Z/dZ) provides an independent route to the
same number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .arith import (
    _mult_order,
    carmichael_lambda,
    divisors,
    euler_phi,
    factorize,
    is_prime,
)
from .classify import classify_prime, rp_class_index
from .errors import DomainError, RangeLimitError

ORACLE_LIMIT = 10**6

METHOD_EXACT = "exact-bracket"
METHOD_DP = "dp-lower-bound"
METHOD_PHI_LAMBDA = "phi-over-lambda"

# Width of the rank correction: the exact correction term is not computed
# here, only its universal range 0..4.
CORRECTION_SLACK = 4


def characteristic(q: int) -> tuple[int, int]:
    """(p, e) with q = p**e for a prime power q >= 2."""
    if q < 2:
        raise DomainError(f"q = {q} is not a prime power")
    f = factorize(q)
    if len(f.factors) != 1:
        raise DomainError(f"q = {q} is not a prime power")
    return f.factors[0]


@dataclass(frozen=True)
class RankTerm:
    divisor: int
    phi: int
    order: int
    contribution: int


@dataclass(frozen=True)
class RankBracket:
    """Certified bounds on the rank of the d-th curve over F_q(t).

    ``upper`` is None for the lower-bound-only methods.  ``i_q`` holds the
    method's exact invariant value: the full divisor sum for the exact
    bracket, the partial sum over divisors of d_p for the dp method, and
    the totient/Carmichael quotient for the phi-over-lambda method.
    """

    q: int
    d: int
    i_q: int
    lower: int
    upper: Optional[int]
    method: str
    terms: tuple[RankTerm, ...]


def _term(q: int, e: int) -> RankTerm:
    phi = euler_phi(e)
    order = _mult_order(q, e)
    if phi % order:
        raise ArithmeticError(f"phi({e}) not divisible by order of {q} mod {e}")
    return RankTerm(e, phi, order, phi // order)


def iq(q: int, d: int) -> RankBracket:
    """Exact invariant and rank bracket for d coprime to q."""
    characteristic(q)
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    if math.gcd(d, q) != 1:
        raise DomainError(f"gcd({d}, {q}) != 1; orders are undefined")
    terms = tuple(_term(q, e) for e in divisors(d))
    total = sum(t.contribution for t in terms)
    return RankBracket(
        q, d, total, max(0, total - CORRECTION_SLACK), total, METHOD_EXACT, terms
    )


def orbit_count_oracle(q: int, d: int) -> int:
    """Orbits of x -> q*x on Z/dZ, counted by direct enumeration.

    Equals the number of irreducible factors of t**d - 1 over F_q, hence
    the exact invariant; kept independent of iq() as a cross-check.
    """
    characteristic(q)
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    if d > ORACLE_LIMIT:
        raise RangeLimitError(f"orbit oracle capped at d <= {ORACLE_LIMIT}")
    if math.gcd(d, q) != 1:
        raise DomainError(f"gcd({d}, {q}) != 1")
    qq = q % d
    seen = bytearray(d)
    count = 0
    for start in range(d):
        if seen[start]:
            continue
        count += 1
        x = start
        while not seen[x]:
            seen[x] = 1
            x = x * qq % d
    return count


@dataclass(frozen=True)
class DpDecomposition:
    """d_p: the largest divisor of d with all prime factors in R_p."""

    p: int
    d: int
    d_p: int
    support: tuple[tuple[int, int, int], ...]  # (prime, exponent, class index)


def dp_of(p: int, d: int) -> DpDecomposition:
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    want = rp_class_index(p)
    d_p = 1
    support = []
    for r, e in factorize(d):
        if r == 2 or r == p:
            continue
        k = classify_prime(p, r).k
        if k == want:
            d_p *= r**e
            support.append((r, e, k))
    return DpDecomposition(p, d, d_p, tuple(support))


def rank_lower_bound(q: int, d: int) -> RankBracket:
    """Unconditional lower bound from the divisor sum over d_p; no upper bound."""
    p, _ = characteristic(q)
    dec = dp_of(p, d)
    terms = tuple(_term(q, e) for e in divisors(dec.d_p))
    partial = sum(t.contribution for t in terms)
    return RankBracket(
        q, d, partial, max(0, partial - CORRECTION_SLACK), None, METHOD_DP, terms
    )


def phi_over_lambda_bound(q: int, d: int) -> RankBracket:
    """Weaker unconditional lower bound phi(d_p)/lambda(d_p) - 4."""
    p, _ = characteristic(q)
    dec = dp_of(p, d)
    f = factorize(dec.d_p)
    phi, lam = euler_phi(f), carmichael_lambda(f)
    if phi % lam:
        raise ArithmeticError(f"phi({dec.d_p}) not divisible by lambda({dec.d_p})")
    quotient = phi // lam
    return RankBracket(
        q, d, quotient, max(0, quotient - CORRECTION_SLACK), None, METHOD_PHI_LAMBDA, ()
    )


def brumer_envelope(p: int, d: int) -> float:
    """Main term d*log(p)/(2*log(d)) of the general rank upper bound.

    Informational only: the second-order term is not computed, so this is
    not a certified bound at small d.
    """
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if d < 2:
        raise DomainError(f"envelope needs d >= 2, got {d}")
    return d * math.log(p) / (2.0 * math.log(d))
