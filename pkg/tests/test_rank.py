import math

import pytest

from rankstats.arith import divisors, mult_order
from rankstats.errors import DomainError, RangeLimitError
from rankstats.rank import (
    METHOD_DP,
    METHOD_EXACT,
    METHOD_PHI_LAMBDA,
    brumer_envelope,
    characteristic,
    dp_of,
    iq,
    orbit_count_oracle,
    phi_over_lambda_bound,
    rank_lower_bound,
)

PRIME_POWERS = (2, 3, 4, 5, 8, 9)


def test_characteristic():
    assert characteristic(2) == (2, 1)
    assert characteristic(9) == (3, 2)
    assert characteristic(8) == (2, 3)
    for bad in (1, 6, 12, 100):
        with pytest.raises(DomainError):
            characteristic(bad)


def test_iq_worked_examples():
    b = iq(2, 9)
    assert b.i_q == 3
    assert [(t.divisor, t.phi, t.order) for t in b.terms] == [(1, 1, 1), (3, 2, 2), (9, 6, 6)]
    assert (b.lower, b.upper, b.method) == (0, 3, METHOD_EXACT)

    b = iq(3, 8)
    assert b.i_q == 5
    assert [t.contribution for t in b.terms] == [1, 1, 1, 2]

    for q in PRIME_POWERS:
        assert iq(q, 1).i_q == 1

    b = iq(3, 133)
    assert b.i_q == 9
    assert (b.lower, b.upper) == (5, 9)
    assert [t.contribution for t in b.terms] == [1, 1, 1, 6]


def test_iq_requires_coprime_prime_power():
    with pytest.raises(DomainError):
        iq(3, 6)
    with pytest.raises(DomainError):
        iq(6, 5)


def test_orbit_oracle_examples():
    assert orbit_count_oracle(2, 9) == 3
    assert orbit_count_oracle(3, 8) == 5
    for q in PRIME_POWERS:
        assert orbit_count_oracle(q, 1) == 1
    with pytest.raises(RangeLimitError):
        orbit_count_oracle(2, 10**6 + 1)
    with pytest.raises(DomainError):
        orbit_count_oracle(2, 8)


def test_iq_matches_orbit_oracle_small():
    for q in PRIME_POWERS:
        for d in range(1, 300):
            if math.gcd(d, q) != 1:
                continue
            assert iq(q, d).i_q == orbit_count_oracle(q, d), (q, d)


def test_term_integrality_and_positivity():
    for q, d in [(2, 3**5), (3, 2**6), (5, 1008 + 1), (9, 2**5 * 7)]:
        b = iq(q, d)
        for t in b.terms:
            assert t.contribution >= 1
            assert t.phi == t.order * t.contribution


def test_iq_monotone_under_divisors():
    for q, d in [(2, 945), (3, 880), (4, 225), (5, 1344), (8, 1035), (9, 1000)]:
        if math.gcd(q, d) != 1:
            continue
        total = iq(q, d).i_q
        for f in divisors(d):
            assert iq(q, f).i_q <= total


def test_shifted_power_special_case_small():
    for p in (2, 3):
        for n in range(1, 7):
            d = p**n + 1
            assert mult_order(p, d).order == 2 * n
            assert 2 * n * iq(p, d).i_q >= d


def test_dp_of():
    assert dp_of(3, 35).d_p == 7
    assert dp_of(3, 35).support == ((7, 1, 1),)
    assert dp_of(2, 45).d_p == 5
    assert dp_of(5, 1).d_p == 1
    # p and 2 never contribute
    assert dp_of(3, 3 * 2**4 * 7**2).d_p == 49


def test_rank_lower_bound_examples():
    assert rank_lower_bound(3, 133).lower == 5
    assert rank_lower_bound(3, 35).lower == 0
    for q in PRIME_POWERS:
        b = rank_lower_bound(q, 1)
        assert b.lower == 0
        assert b.upper is None
        assert b.method == METHOD_DP


def test_lower_bounds_work_without_coprimality():
    # the unconditional bounds apply to every d, even d sharing a factor with q
    assert rank_lower_bound(3, 6).lower == 0
    assert phi_over_lambda_bound(3, 6).lower == 0
    assert rank_lower_bound(3, 3 * 133).i_q == 9


def test_phi_over_lambda_examples():
    b = phi_over_lambda_bound(3, 133)
    assert b.lower == 2
    assert b.method == METHOD_PHI_LAMBDA
    assert phi_over_lambda_bound(2, 45).lower == 0
    for q in PRIME_POWERS:
        assert phi_over_lambda_bound(q, 1).lower == 0


def test_bound_ordering_on_members():
    from rankstats.classify import classify_up

    for q in (2, 3, 4, 5):
        p = characteristic(q)[0]
        for d in range(1, 300):
            if math.gcd(d, q) != 1 or not classify_up(p, d).member:
                continue
            weak = phi_over_lambda_bound(q, d).lower
            mid = rank_lower_bound(q, d).lower
            up = iq(q, d).upper
            assert weak <= mid <= up, (q, d)


def test_brumer_envelope():
    assert brumer_envelope(3, 3) == 1.5
    assert brumer_envelope(2, 2) == 1.0
    assert abs(brumer_envelope(2, 9) - 9 * math.log(2) / (2 * math.log(9))) < 1e-15
    with pytest.raises(DomainError):
        brumer_envelope(2, 1)
    with pytest.raises(DomainError):
        brumer_envelope(4, 9)


def test_iq_on_prime_power_bases():
    # composite prime powers go through their characteristic for membership
    assert iq(4, 9).i_q == orbit_count_oracle(4, 9) == 5
    assert iq(8, 5).i_q == orbit_count_oracle(8, 5)
    assert iq(9, 8).i_q == orbit_count_oracle(9, 8)
