"""Sieve-driven censuses and surveys.

Observed counts are always exact integers; predicted densities are exact
rationals from the limiting distributions, and the reports carry the
observed/baseline ratio together with its deviation from the prediction.
Censuses parallelize over disjoint index ranges; partial counts merge by
plain addition, so thread count never changes any output.
"""

from __future__ import annotations

import math
import multiprocessing
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import arith
from .classify import order_two_valuation, rp_class_index, varpi_count
from .errors import DomainError
from .rank import characteristic, iq
from .sieve import PrimeTable

BASELINE_PI = "pi-of-x"
BASELINE_LI = "li-of-x"
BASELINE_X = "x"

FLAG_COMPLEMENT = "derived-by-complement"
FLAG_AGGREGATE = "aggregate"
FLAG_OBSERVATIONAL = "observational"


def log_nu(nu: int, x: float) -> float:
    """Iterated logarithm with the max(log, 1) convention at every level."""
    if nu < 1:
        raise DomainError(f"log_nu needs nu >= 1, got {nu}")
    v = float(x)
    for _ in range(nu):
        v = max(math.log(v), 1.0)
    return v


def li(x: float) -> float:
    """Logarithmic integral of x with lower limit 2, by adaptive quadrature."""
    if x < 2:
        raise DomainError(f"li is defined for x >= 2, got {x}")
    if x == 2:
        return 0.0
    from scipy.integrate import quad  # deferred: keeps bare CLI start fast

    val, _err = quad(lambda t: 1.0 / math.log(t), 2.0, float(x),
                     epsabs=1e-11, epsrel=1e-11, limit=400)
    return val


@dataclass(frozen=True)
class CensusRow:
    label: str
    observed: int
    predicted: Optional[Fraction]
    ratio: float
    deviation: Optional[float]
    flag: Optional[str] = None


@dataclass
class CensusReport:
    label: str
    x: int
    baseline: str
    baseline_value: float
    rows: list[CensusRow]
    notes: dict = field(default_factory=dict)


def _row(label, observed, predicted, baseline_value, flag=None) -> CensusRow:
    ratio = observed / baseline_value if baseline_value else 0.0
    dev = abs(ratio - float(predicted)) if predicted is not None else None
    return CensusRow(label, int(observed), predicted, ratio, dev, flag)


# ----------------------------------------------------------------- parallelism
#
# Chunk workers are plain module functions reading their shared state from
# _WORKER, which the parent populates immediately before forking the pool.

_WORKER: dict = {}


def _chunk_bounds(lo: int, hi: int, threads: int) -> list[tuple[int, int]]:
    n = hi - lo
    if n <= 0:
        return []
    pieces = 1 if threads <= 1 else min(n, threads * 4)
    size = -(-n // pieces)
    return [(lo + i, min(lo + i + size, hi)) for i in range(0, n, size)]


def _run_chunks(fn, args_list, threads: int) -> list:
    if threads <= 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    try:
        # workers read _WORKER via fork inheritance; without fork, run serial
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        return [fn(a) for a in args_list]
    workers = min(threads, len(args_list))
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as ex:
        return list(ex.map(fn, args_list))


def _class_chunk(bounds) -> dict[int, int]:
    lo, hi = bounds
    p = _WORKER["p"]
    out = {}
    for r in _WORKER["primes"][lo:hi]:
        if r == 2 or r == p:
            continue
        t = r - 1
        s = (t & -t).bit_length() - 1
        t >>= s
        b = pow(p, t, r)
        k = 0
        while b != 1:
            b = b * b % r
            k += 1
        out[r] = k
    return out


def prime_classes(p: int, table: PrimeTable, threads: int = 1,
                  x: Optional[int] = None) -> dict[int, int]:
    """k = v_2(order of p mod r) for every odd prime r <= x, r != p."""
    _WORKER.clear()
    _WORKER.update(p=p, primes=table.prime_list(x))
    chunks = _chunk_bounds(0, len(_WORKER["primes"]), threads)
    merged: dict[int, int] = {}
    for part in _run_chunks(_class_chunk, chunks, threads):
        merged.update(part)
    return merged


def _small_p_warning(p: int, x: int) -> Optional[str]:
    bound = log_nu(1, x) ** (2 / 3)
    if p > bound:
        return (f"p = {p} exceeds (log x)^(2/3) = {bound:.2f}; the limiting "
                "densities are not guaranteed at this scale")
    return None


# ----------------------------------------------------------------- rpk census
def _rpk_chunk(bounds) -> list[int]:
    lo, hi = bounds
    p = _WORKER["p"]
    kmax = _WORKER["kmax"]
    buckets = [0] * (kmax + 2)
    for r in _WORKER["primes"][lo:hi]:
        if r == 2 or r == p:
            continue
        t = r - 1
        s = (t & -t).bit_length() - 1
        t >>= s
        b = pow(p, t, r)
        k = 0
        while b != 1:
            b = b * b % r
            k += 1
        buckets[k if k <= kmax else kmax + 1] += 1
    return buckets


def rpk_census(p: int, x: int, k_max: int = 5, *,
               table: Optional[PrimeTable] = None, threads: int = 1) -> CensusReport:
    """Census of odd primes r <= x by class k = v_2(order of p mod r).

    Limiting densities: for odd p the k = 1, 2, >=3 shares are 1/3, 1/6,
    1/6; for p = 2 they are 7/24, 1/3, 1/12.  The k = 0 share is the
    complement and is flagged as derived.
    """
    if not arith.is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if k_max < 2:
        raise DomainError(f"k_max must be >= 2, got {k_max}")
    if table is None:
        table = PrimeTable(x)
    _WORKER.clear()
    _WORKER.update(p=p, kmax=k_max, primes=table.prime_list(x))
    npr = len(_WORKER["primes"])
    chunks = _chunk_bounds(0, npr, threads)
    buckets = [0] * (k_max + 2)
    for part in _run_chunks(_rpk_chunk, chunks, threads):
        buckets = [a + b for a, b in zip(buckets, part)]

    pi_x = npr
    if p == 2:
        dens = {0: Fraction(7, 24), 1: Fraction(7, 24), 2: Fraction(1, 3)}
        tail_dens = Fraction(1, 12)
    else:
        dens = {0: Fraction(1, 3), 1: Fraction(1, 3), 2: Fraction(1, 6)}
        tail_dens = Fraction(1, 6)
    rows = [_row("k=0", buckets[0], dens[0], pi_x, FLAG_COMPLEMENT)]
    for k in range(1, k_max + 1):
        rows.append(_row(f"k={k}", buckets[k], dens.get(k), pi_x))
    rows.append(_row(f"k>{k_max}", buckets[k_max + 1], None, pi_x))
    rows.append(_row("k>=3", sum(buckets[3:]), tail_dens, pi_x, FLAG_AGGREGATE))

    report = CensusReport(f"class census p={p}", x, BASELINE_PI, pi_x, rows)
    report.notes["excluded"] = pi_x - sum(buckets)
    warn = _small_p_warning(p, x)
    if warn:
        report.notes["warning"] = warn
    return report


# ----------------------------------------------------------------- qpm census
def _qpm_chunk(bounds) -> int:
    lo, hi = bounds
    p, m, want = _WORKER["p"], _WORKER["m"], _WORKER["want"]
    count = 0
    for r in _WORKER["primes"][lo:hi]:
        if r == 2 or r == p or (r - 1) % m:
            continue
        t = r - 1
        s = (t & -t).bit_length() - 1
        t >>= s
        b = pow(p, t, r)
        k = 0
        while b != 1:
            b = b * b % r
            k += 1
        if k == want:
            count += 1
    return count


def qpm_census(p: int, m: int, x: int, *,
               table: Optional[PrimeTable] = None, threads: int = 1) -> CensusReport:
    """Census of primes in R_p lying in the residue class 1 mod m.

    The limiting share of all primes is 1/(3*phi(m)).
    """
    if not arith.is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if m < 1 or m % 2 == 0:
        raise DomainError(f"m must be odd and positive, got {m}")
    if m % p == 0:
        raise DomainError(f"m = {m} must not be divisible by p = {p}")
    if table is None:
        table = PrimeTable(x)
    _WORKER.clear()
    _WORKER.update(p=p, m=m, want=rp_class_index(p), primes=table.prime_list(x))
    npr = len(_WORKER["primes"])
    chunks = _chunk_bounds(0, npr, threads)
    count = sum(_run_chunks(_qpm_chunk, chunks, threads))
    predicted = Fraction(1, 3 * arith.euler_phi(m))
    report = CensusReport(f"residue-class census p={p} m={m}", x, BASELINE_PI,
                          npr, [_row("members", count, predicted, npr)])
    warn = _small_p_warning(p, x)
    if warn:
        report.notes["warning"] = warn
    return report


# ----------------------------------------------------------------- npk census
def _npk_chunk(bounds) -> int:
    lo, hi = bounds
    p, k = _WORKER["p"], _WORKER["k"]
    count = 0
    for r in _WORKER["primes"][lo:hi]:
        if r == 2 or r == p:
            continue
        t = r - 1
        s = (t & -t).bit_length() - 1
        if s != k:
            continue
        t >>= s
        b = pow(p, t, r)
        c = 0
        while b != 1:
            b = b * b % r
            c += 1
        if c == 1:
            count += 1
    return count


def npk_census(p: int, x: int, k: int, *,
               table: Optional[PrimeTable] = None, threads: int = 1) -> CensusReport:
    """Primes with order-class exactly 1 and v_2(r-1) = k, two ways.

    The direct bucket count is recomputed through the four-term
    inclusion-exclusion over complete-splitting counts; both rows must agree
    exactly.  The predicted density against li(x) is 4**-k for odd p; for
    p = 2 the prediction is omitted (the relevant field degrees halve).
    """
    if not arith.is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if table is None:
        table = PrimeTable(x)
    _WORKER.clear()
    _WORKER.update(p=p, k=k, primes=table.prime_list(x))
    npr = len(_WORKER["primes"])
    chunks = _chunk_bounds(0, npr, threads)
    direct = sum(_run_chunks(_npk_chunk, chunks, threads))

    primes = _WORKER["primes"]
    ie = (varpi_count(p, x, 2**k, 2 ** (k - 1), primes)
          - varpi_count(p, x, 2**k, 2**k, primes)
          - varpi_count(p, x, 2 ** (k + 1), 2 ** (k - 1), primes)
          + varpi_count(p, x, 2 ** (k + 1), 2**k, primes))

    baseline = li(x)
    predicted = Fraction(1, 4**k) if p > 2 else None
    rows = [
        _row("direct", direct, predicted, baseline),
        _row("inclusion-exclusion", ie, predicted, baseline),
    ]
    report = CensusReport(f"two-part census p={p} k={k}", x, BASELINE_LI,
                          baseline, rows)
    if p == 2:
        report.notes["warning"] = ("no density asserted for p = 2: the "
                                   "splitting-field degrees halve")
    return report


# ------------------------------------------------------------------ up census
def _up_chunk(bounds):
    lo, hi = bounds
    p = _WORKER["p"]
    cap1 = _WORKER["cap1"]
    classes = _WORKER["classes"]
    spf = _WORKER["spf"]
    spf_limit = _WORKER["spf_limit"]
    collect = _WORKER["collect"]
    total = 0
    by_class: dict[int, int] = {}
    members = [] if collect else None
    for d in range(lo, hi):
        n = d
        v2 = 0
        k = 0
        ok = True
        while n > 1:
            if n <= spf_limit:
                r = int(spf[n])
            else:
                r = arith.factorize(n).factors[0][0]
            e = 0
            while n % r == 0:
                n //= r
                e += 1
            if r == 2:
                v2 = e
                continue
            if r == p:
                ok = False
                break
            kr = classes[r]
            if kr == 0 or (k and kr != k):
                ok = False
                break
            k = kr
        if not ok:
            continue
        if p == 2:
            if v2:
                continue
        else:
            if v2 > (cap1 if k <= 1 else 1):
                continue
        total += 1
        by_class[k if k else 1] = by_class.get(k if k else 1, 0) + 1
        if collect:
            members.append(d)
    return total, by_class, members


def up_members(p: int, x: int, *, table: Optional[PrimeTable] = None,
               threads: int = 1) -> list[int]:
    """All members d <= x of the divisor set of the sequence p**n + 1."""
    return _up_scan(p, x, table, threads, collect=True)[2]


def _up_scan(p, x, table, threads, collect):
    if not arith.is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if x < 1:
        raise DomainError(f"x must be positive, got {x}")
    if table is None:
        table = PrimeTable(x)
    classes = prime_classes(p, table, threads, x)
    _WORKER.clear()
    _WORKER.update(p=p, cap1=arith.valuation(2, p + 1), classes=classes,
                   spf=table.spf, spf_limit=table.spf_limit, collect=collect)
    chunks = _chunk_bounds(1, x + 1, threads)
    total = 0
    by_class: dict[int, int] = {}
    members: list[int] = []
    for part_total, part_classes, part_members in _run_chunks(_up_chunk, chunks, threads):
        total += part_total
        for key, val in part_classes.items():
            by_class[key] = by_class.get(key, 0) + val
        if collect:
            members.extend(part_members)
    return total, by_class, members


def up_census(p: int, x: int, *, table: Optional[PrimeTable] = None,
              threads: int = 1, collect_members: bool = False) -> CensusReport:
    """Exact member count of the divisor set up to x.

    The note ``cp_estimate`` holds count * (log x)^(2/3) / x, an empirical
    stand-in for the (unknown) constant in the asymptotic member count
    ~ c * x / (log x)^(2/3); convergence is slow, so it is observational.
    """
    total, by_class, members = _up_scan(p, x, table, threads, collect_members)
    report = CensusReport(f"divisor-set census p={p}", x, BASELINE_X, x,
                          [_row("members", total, None, x, FLAG_OBSERVATIONAL)])
    report.notes["cp_estimate"] = total * log_nu(1, x) ** (2 / 3) / x
    report.notes["by_class"] = {f"k={k}": by_class[k] for k in sorted(by_class)}
    if collect_members:
        report.notes["members"] = members
    return report


# ------------------------------------------------------------------- surveys
@dataclass
class AverageRankSurvey:
    q: int
    p: int
    x: int
    count: int
    sum_iq: int
    mean_iq: float
    median_iq: float
    max_iq: int
    argmax_d: int
    envelope: float  # observational: x**(1 - log_3 x / (2 log_2 x))
    samples: list[tuple[int, int]]


def average_rank_survey(q: int, x: int, *, table: Optional[PrimeTable] = None,
                        threads: int = 1, keep_samples: bool = True) -> AverageRankSurvey:
    """Distribution of the exact invariant over the divisor-set members <= x."""
    p, _ = characteristic(q)
    members = up_members(p, x, table=table, threads=threads)
    samples = [(d, iq(q, d).i_q) for d in members]
    values = [v for _, v in samples]
    max_iq = max(values)
    argmax = min(d for d, v in samples if v == max_iq)
    envelope = x ** (1.0 - log_nu(3, x) / (2.0 * log_nu(2, x)))
    return AverageRankSurvey(
        q=q, p=p, x=x, count=len(values), sum_iq=sum(values),
        mean_iq=sum(values) / len(values),
        median_iq=float(statistics.median(values)),
        max_iq=max_iq, argmax_d=argmax, envelope=envelope,
        samples=samples if keep_samples else [],
    )


@dataclass(frozen=True)
class NormalOrderSample:
    d: int
    d_p: int
    ratio_log: float  # log of the integer phi(d_p)/lambda(d_p)
    h_p: float        # truncated additive statistic


@dataclass
class NormalOrderSurvey:
    p: int
    x: int
    sample_size: int
    seed: Optional[int]
    exhaustive: bool
    y: float
    l_bound: float
    target: float     # y log y / 3
    tolerance: float  # y log_2 y
    mean_h: float
    median_h: float
    within_fraction: float
    samples: list[NormalOrderSample]


def normal_order_survey(p: int, x: int, sample_size: int, seed: Optional[int],
                        *, table: Optional[PrimeTable] = None) -> NormalOrderSurvey:
    """Sampled (or exhaustive, when sample_size >= x) order statistics.

    For each d the survey reports log(phi/lambda) of the R_p-part of d and
    the additive statistic h_p(d) = sum of v_l(phi(d_p)) log l over primes
    l <= y log y, with y the doubly iterated logarithm of x.  The normal
    order of h_p is y log y / 3; at desk scales this is observational only.
    """
    if not arith.is_prime(p):
        raise DomainError(f"p = {p} is not prime")
    if x < 1 or sample_size < 1:
        raise DomainError("x and sample_size must be positive")
    if sample_size > x:
        raise DomainError(f"sample_size {sample_size} exceeds x = {x}")
    if table is None:
        table = PrimeTable(x)
    want = rp_class_index(p)
    y = log_nu(2, x)
    l_bound = y * math.log(y)
    target = y * math.log(y) / 3.0
    tolerance = y * log_nu(2, y)
    small = [l for l in table.prime_list() if l <= l_bound]

    exhaustive = sample_size >= x
    if exhaustive:
        ds = range(1, x + 1)
    else:
        if seed is None:
            raise DomainError("sampled surveys require a seed")
        rng = random.Random(seed)
        ds = [rng.randrange(1, x + 1) for _ in range(sample_size)]

    samples = []
    hs = []
    for d in ds:
        d_p = 1
        phi = 1
        lam = 1
        for r, e in table.factorize(d):
            if r == 2 or r == p:
                continue
            if order_two_valuation(p, r) == want:
                d_p *= r**e
                block = r ** (e - 1) * (r - 1)
                phi *= block
                lam = math.lcm(lam, block)
        quotient, rem = divmod(phi, lam)
        if rem:
            raise ArithmeticError(f"phi/lambda not integral at d_p = {d_p}")
        h = 0.0
        v = dict(table.factorize(phi))
        for l in small:
            e = v.get(l, 0)
            if e:
                h += e * math.log(l)
        samples.append(NormalOrderSample(d, d_p, math.log(quotient), h))
        hs.append(h)

    within = sum(1 for h in hs if abs(h - target) <= tolerance) / len(hs)
    return NormalOrderSurvey(
        p=p, x=x, sample_size=len(hs), seed=None if exhaustive else seed,
        exhaustive=exhaustive, y=y, l_bound=l_bound, target=target,
        tolerance=tolerance, mean_h=sum(hs) / len(hs),
        median_h=float(statistics.median(hs)),
        within_fraction=within, samples=samples,
    )
