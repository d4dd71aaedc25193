import math

import pytest

from rankstats.arith import factorize, is_prime, mult_order
from rankstats.census import li, log_nu
from rankstats.errors import DomainError, RangeLimitError
from rankstats.sieve import sieve_primes, spf_table


def test_sieve_small():
    assert sieve_primes(1).size == 0
    assert sieve_primes(2).tolist() == [2]
    assert sieve_primes(10).tolist() == [2, 3, 5, 7]
    assert len(sieve_primes(100)) == 25


def test_sieve_counts():
    assert len(sieve_primes(10**6)) == 78498
    assert len(sieve_primes(10**5)) == 9592


def test_sieve_agrees_with_primality():
    primes = set(sieve_primes(3000).tolist())
    for n in range(3000 + 1):
        assert (n in primes) == is_prime(n)


def test_sieve_segment_boundaries():
    # bounds straddling the segment size must not lose or duplicate primes
    for x in (1 << 10, (1 << 10) + 1, 4097, 65537):
        arr = sieve_primes(x)
        assert arr.tolist() == sorted(set(arr.tolist()))
        assert arr[-1] <= x


def test_sieve_range_error():
    with pytest.raises(RangeLimitError):
        sieve_primes(10**8 + 1)


def test_spf_table():
    spf = spf_table(10**4)
    for n in range(2, 10**4 + 1):
        assert spf[n] == factorize(n).factors[0][0]


def test_prime_table_factorize(table_1e5):
    for n in (1, 2, 84, 720720 % 10**5, 99991):
        assert table_1e5.factorize(n) == list(factorize(n).factors)
    # beyond the table it falls back to direct factorization
    assert table_1e5.factorize(10**5 + 3) == list(factorize(10**5 + 3).factors)


def test_prime_table_order(table_1e5):
    for r in table_1e5.prime_list(2000):
        if r == 2:
            continue
        assert table_1e5.order(2, r) == mult_order(2, r).order
        assert table_1e5.order(3, r) == mult_order(3, r).order if r != 3 else True


def test_prime_table_slicing(table_1e5):
    assert table_1e5.pi(100) == 25
    assert table_1e5.pi() == 9592
    assert table_1e5.prime_list(10) == [2, 3, 5, 7]
    with pytest.raises(DomainError):
        table_1e5.prime_list(10**6)


def simpson_li(x, steps):
    """Quadrature oracle at a fixed step count, for cross-checking li."""
    if x == 2:
        return 0.0
    h = (x - 2) / steps
    total = 1 / math.log(2) + 1 / math.log(x)
    for i in range(1, steps):
        t = 2 + i * h
        total += (4 if i % 2 else 2) / math.log(t)
    return total * h / 3


def test_li_against_quadrature_oracle():
    for x, steps, tol in ((100, 20000, 1e-6), (10**4, 400000, 1e-4)):
        a = simpson_li(x, steps)
        b = simpson_li(x, 2 * steps)
        assert abs(a - b) < tol  # oracle self-consistency
        assert abs(li(x) - b) < tol


def test_li_fixed_values():
    assert li(2) == 0.0
    assert abs(li(100) - 29.081) < 0.01
    assert abs(li(10**6) - 78626.5) < 0.5
    with pytest.raises(DomainError):
        li(1.5)


def test_log_nu_convention():
    assert log_nu(1, 2.0) == 1.0  # max(log 2, 1)
    assert log_nu(1, 100.0) == math.log(100.0)
    assert log_nu(2, 10**6) == math.log(math.log(10**6))
    # once the inner value drops to 1, every further level sticks at 1
    assert log_nu(3, 50.0) == 1.0
    with pytest.raises(DomainError):
        log_nu(0, 10.0)
