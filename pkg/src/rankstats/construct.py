"""Constructing parameters d with certified large rank lower bounds.

The pipeline picks a residue class u mod 4p, collects primes r in a window
whose shifted value r - 1 divides the lcm of 1..y, multiplies m of them, and
certifies each product: membership of the divisor set, the exact order and
invariant, and the resulting rank lower bound.  Certificates are always
recomputed from scratch in :func:`certify`, so nothing downstream depends on
the selection filters being right.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .arith import (
    euler_phi,
    factorize,
    is_prime,
    largest_prime_factor,
    lcm_upto,
    legendre_symbol,
    mult_order,
)
from .census import log_nu
from .classify import UpClassification, classify_up
from .errors import DomainError, InsufficientInputError, VerificationError
from .rank import CORRECTION_SLACK, characteristic, iq

MODE_PAPER = "paper-faithful"
MODE_DIRECT = "direct"

DELTA_MAX = Fraction(1, 12)
DEFAULT_DELTA = Fraction(1, 24)


def select_u(p: int) -> int:
    """Residue class for the prime window: u = 5 for p = 2, else the least
    u == 3 (mod 4) that is a quadratic non-residue mod p."""
    if not is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if p == 2:
        return 5
    u = 3
    while legendre_symbol(u, p) != -1:
        u += 4
    return u


@dataclass(frozen=True)
class DerivedParameters:
    p: int
    u: int
    y: int
    m_y: int
    z: Optional[float]
    z_low: int
    z_high: int
    interval: Optional[tuple[int, int]]
    m: int


@dataclass(frozen=True)
class ConstructionSpec:
    """Inputs for a construction run.

    ``paper-faithful`` mode derives everything from the target bound x and
    the shape parameter delta in (0, 1/12); ``direct`` mode takes the
    smoothness level y and the window explicitly (the certified guarantees
    do not depend on the derivation, only the asymptotic counting does).
    """

    q: int
    mode: str = MODE_DIRECT
    x: Optional[int] = None
    delta: Fraction = DEFAULT_DELTA
    y: Optional[int] = None
    z_low: Optional[int] = None
    z_high: Optional[int] = None
    m: int = 1
    interval_filter: Optional[bool] = None
    limit: int = 1000

    def derive(self) -> DerivedParameters:
        p, _ = characteristic(self.q)
        u = select_u(p)
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")
        if self.mode == MODE_PAPER:
            if self.x is None or self.x < 2:
                raise DomainError("paper-faithful mode needs a target bound x >= 2")
            delta = Fraction(self.delta)
            if not 0 < delta < DELTA_MAX:
                raise DomainError(f"delta must lie in (0, 1/12), got {delta}")
            fdelta = float(delta)
            y = max(1, int(math.log(self.x) / log_nu(2, self.x)))
            z = float(y) ** (2.0 / (1.0 - 2.0 * fdelta))
            z_low = max(2, math.ceil(z / 2))
            z_high = math.floor(z)
            interval = (
                math.floor(z ** (0.5 - 2.0 * fdelta)),
                math.ceil(z ** (0.5 - fdelta)),
            )
            m = max(1, int(math.log(self.x) / math.log(z))) if z > 1 else 1
            use_interval = True if self.interval_filter is None else self.interval_filter
            return DerivedParameters(p, u, y, lcm_upto(y), z, z_low, z_high,
                                     interval if use_interval else None, m)
        if self.mode == MODE_DIRECT:
            if self.y is None or self.y < 1:
                raise DomainError("direct mode needs a smoothness level y >= 1")
            if self.z_high is None:
                raise DomainError("direct mode needs a window upper end")
            z_high = self.z_high
            z_low = self.z_low if self.z_low is not None else max(2, -(-z_high // 2))
            if z_low > z_high:
                raise DomainError(f"empty window [{z_low}, {z_high}]")
            interval = None
            if self.interval_filter:
                interval = (1, self.y)
            return DerivedParameters(p, u, self.y, lcm_upto(self.y), None,
                                     z_low, z_high, interval, self.m)
        raise DomainError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class FindQResult:
    primes: tuple[int, ...]
    diagnostics: dict


def find_Q(spec: ConstructionSpec, primes: Iterable[int]) -> FindQResult:
    """Primes in the window with r == u (mod 4p) and r - 1 dividing M_y.

    The optional interval filter additionally requires the largest prime
    factor of r - 1 to land in the derived interval.  An empty result is
    reported with per-filter failure counts, not raised.
    """
    d = spec.derive()
    modulus = 4 * d.p
    target = d.u % modulus
    diag = {"window_primes": 0, "fail_congruence": 0, "fail_smooth": 0,
            "fail_interval": 0, "selected": 0}
    out = []
    for r in primes:
        if r < d.z_low:
            continue
        if r > d.z_high:
            break
        diag["window_primes"] += 1
        if r % modulus != target:
            diag["fail_congruence"] += 1
            continue
        if d.m_y % (r - 1):
            diag["fail_smooth"] += 1
            continue
        if d.interval is not None:
            big = largest_prime_factor(r - 1)
            if not d.interval[0] <= big <= d.interval[1]:
                diag["fail_interval"] += 1
                continue
        diag["selected"] += 1
        out.append(r)
    return FindQResult(tuple(out), diag)


@dataclass(frozen=True)
class ConstructionCertificate:
    """A fully recomputed witness for one constructed parameter d."""

    q: int
    d: int
    support: tuple[int, ...]
    m_y: int
    up_class: UpClassification
    order: int
    i_q: int
    rank_lower: int
    weak_lower: Fraction


def certify(q: int, d: int, m_y: int) -> ConstructionCertificate:
    """Recompute every certificate field from scratch, or raise.

    Checks, in order: d is a squarefree product of primes coprime to q, d is
    a member of the divisor set, every support prime has r - 1 | m_y, and
    the order of q mod d divides m_y.  The weaker comparison bound
    phi(d)/order - 4 is reported alongside the invariant-based bound.
    """
    p, _ = characteristic(q)
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    if m_y < 1:
        raise DomainError(f"m_y must be positive, got {m_y}")
    if math.gcd(d, q) != 1:
        raise DomainError(f"gcd({d}, {q}) != 1")
    f = factorize(d)
    if any(e > 1 for _, e in f):
        raise VerificationError("squarefree-support",
                                f"d = {d} is not a product of distinct primes")
    support = tuple(r for r, _ in f)
    up = classify_up(p, d)
    if not up.member:
        raise VerificationError(
            "membership", f"d = {d} is not a divisor of any p**n + 1 "
                          f"(p = {p}, rejection: {up.rejection})")
    for r in support:
        if m_y % (r - 1):
            raise VerificationError(
                "support-smoothness", f"r - 1 = {r - 1} does not divide m_y = {m_y}")
    order = mult_order(q, d).order if d > 1 else 1
    if m_y % order:
        raise VerificationError(
            "order-divisibility", f"order {order} of {q} mod {d} does not "
                                  f"divide m_y = {m_y}")
    bracket = iq(q, d)
    weak = max(Fraction(0), Fraction(euler_phi(f), order) - CORRECTION_SLACK)
    return ConstructionCertificate(q, d, support, m_y, up, order,
                                   bracket.i_q, bracket.lower, weak)


def build_candidates(q: int, Q: Iterable[int], m: int, limit: int,
                     m_y: Optional[int] = None,
                     strict: bool = False) -> list[ConstructionCertificate]:
    """Certificates for the first ``limit`` m-subsets of Q, lexicographically.

    When m_y is not given, each certificate carries the least common
    multiple of r - 1 over its own support.  Subsets that fail
    certification are skipped unless ``strict``.
    """
    characteristic(q)
    pool = sorted(set(Q))
    for r in pool:
        if not is_prime(r):
            raise DomainError(f"Q must consist of primes; got {r}")
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    if len(pool) < m:
        raise InsufficientInputError(len(pool), m)
    if limit < 0:
        raise DomainError(f"limit must be >= 0, got {limit}")
    out = []
    for combo in itertools.islice(itertools.combinations(pool, m), limit):
        d = math.prod(combo)
        my = m_y if m_y is not None else math.lcm(*(r - 1 for r in combo))
        try:
            out.append(certify(q, d, my))
        except (VerificationError, DomainError):
            if strict:
                raise
    return out
