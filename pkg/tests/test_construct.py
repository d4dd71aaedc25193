import math
from fractions import Fraction

import pytest

from rankstats.arith import carmichael_lambda, legendre_symbol, lcm_upto, mult_order
from rankstats.classify import in_R_p, member_up_direct_oracle
from rankstats.construct import (
    MODE_DIRECT,
    MODE_PAPER,
    ConstructionSpec,
    build_candidates,
    certify,
    find_Q,
    select_u,
)
from rankstats.errors import DomainError, InsufficientInputError, VerificationError
from rankstats.rank import iq


def test_select_u_examples():
    assert select_u(2) == 5
    assert select_u(3) == 11
    assert select_u(5) == 3


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23])
def test_select_u_properties(p):
    u = select_u(p)
    assert u % 4 == 3
    assert legendre_symbol(u, p) == -1


def test_derived_mode_parameters():
    spec = ConstructionSpec(q=2, mode=MODE_PAPER, x=10**12, delta=Fraction(1, 24))
    d = spec.derive()
    assert d.y == 8
    assert d.m_y == lcm_upto(8) == 840
    assert abs(d.z - 8.0 ** (24 / 11)) < 1e-9
    assert (d.z_low, d.z_high) == (math.ceil(d.z / 2), math.floor(d.z))
    # the upper interval endpoint is y up to outward rounding
    assert d.y <= d.interval[1] <= d.y + 1
    assert d.interval[0] <= d.y
    assert d.m == int(math.log(10**12) / math.log(d.z))


def test_derived_mode_delta_validation():
    with pytest.raises(DomainError):
        ConstructionSpec(q=2, mode=MODE_PAPER, x=10**6, delta=Fraction(1, 12)).derive()
    with pytest.raises(DomainError):
        ConstructionSpec(q=2, mode=MODE_PAPER, x=10**6, delta=Fraction(0)).derive()
    ConstructionSpec(q=2, mode=MODE_PAPER, x=10**6, delta=Fraction(1, 13)).derive()


def test_find_q_fixture(table_1e5):
    spec = ConstructionSpec(q=2, mode=MODE_DIRECT, y=16, z_low=5000, z_high=10**4)
    res = find_Q(spec, table_1e5.prime_list())
    assert res.primes == (8581,)
    d = res.diagnostics
    assert d["selected"] == 1
    assert d["window_primes"] == (d["fail_congruence"] + d["fail_smooth"]
                                  + d["fail_interval"] + d["selected"])


def test_find_q_congruence_postcondition(table_1e5):
    spec = ConstructionSpec(q=3, mode=MODE_DIRECT, y=20, z_low=2, z_high=5000)
    res = find_Q(spec, table_1e5.prime_list())
    assert all(r % 12 == 11 for r in res.primes)


def test_find_q_empty_window_is_not_an_error(table_1e5):
    spec = ConstructionSpec(q=2, mode=MODE_DIRECT, y=2, z_low=7000, z_high=7100)
    res = find_Q(spec, table_1e5.prime_list())
    assert res.primes == ()
    assert res.diagnostics["selected"] == 0


def test_find_q_interval_filter(table_1e5):
    # with the filter on, the largest prime factor of r - 1 must be in range
    spec = ConstructionSpec(q=2, mode=MODE_DIRECT, y=16, z_low=5000,
                            z_high=10**4, interval_filter=True)
    res = find_Q(spec, table_1e5.prime_list())
    # P(8580) = 13 <= 16, so the fixture prime survives the direct-mode filter
    assert res.primes == (8581,)


def test_build_candidates_certified_example():
    certs = build_candidates(3, [7, 19], 2, 10)
    assert len(certs) == 1
    c = certs[0]
    assert c.d == 133
    assert c.i_q == 9
    assert c.rank_lower == 5
    assert c.up_class.member is True
    assert c.up_class.witness_exponent == 9
    assert (3**9 + 1) % 133 == 0
    assert c.order == 18 and c.m_y % c.order == 0


def test_build_candidates_m1_shape():
    certs = build_candidates(3, [7], 1, 10)
    c = certs[0]
    assert c.d == 7 and c.i_q == 1 + (7 - 1) // mult_order(3, 7).order
    assert c.rank_lower == max(0, c.i_q - 4)


def test_build_candidates_limits_and_errors():
    assert build_candidates(3, [7, 19], 2, 0) == []
    with pytest.raises(InsufficientInputError) as exc:
        build_candidates(3, [7], 2, 10)
    assert exc.value.available == 1 and exc.value.needed == 2
    with pytest.raises(DomainError):
        build_candidates(3, [7, 15], 2, 10)


def test_build_candidates_lexicographic_and_skips():
    # 11 is not in any class for p = 3 (odd order), so pairs with it fail
    certs = build_candidates(3, [7, 11, 19], 2, 10)
    assert [c.d for c in certs] == [133]
    with pytest.raises(VerificationError):
        build_candidates(3, [7, 11, 19], 2, 10, strict=True)


def test_certificate_invariants_full_pipeline(table_1e5):
    spec = ConstructionSpec(q=2, mode=MODE_DIRECT, y=16, z_low=2, z_high=3000)
    res = find_Q(spec, table_1e5.prime_list())
    assert len(res.primes) >= 3
    certs = build_candidates(2, res.primes, 2, 50, m_y=lcm_upto(16))
    assert certs, "qualifying pairs must certify"
    for c in certs:
        assert all(in_R_p(2, r) for r in c.support)
        assert member_up_direct_oracle(2, c.d)
        lam = carmichael_lambda(c.d)
        assert lam % c.order == 0 and c.m_y % lam == 0
        assert c.rank_lower == max(0, iq(2, c.d).i_q - 4)
        assert c.m_y == lcm_upto(16)


def test_certify_examples():
    c = certify(3, 133, 720720)
    assert (c.rank_lower, c.order) == (5, 18)
    assert c.weak_lower == Fraction(2)

    degenerate = certify(3, 1, 1)
    assert degenerate.i_q == 1 and degenerate.rank_lower == 0
    assert degenerate.support == ()

    with pytest.raises(VerificationError) as exc:
        certify(2, 7, 720720)
    assert exc.value.clause == "membership"


def test_certify_failure_clauses():
    with pytest.raises(VerificationError) as exc:
        certify(3, 49, 720720)  # 7**2 is not squarefree
    assert exc.value.clause == "squarefree-support"

    with pytest.raises(VerificationError) as exc:
        certify(2, 8581, 660)  # 8580 does not divide 660
    assert exc.value.clause == "support-smoothness"

    with pytest.raises(VerificationError) as exc:
        certify(3, 133, 6)  # order 18 does not divide 6
    assert exc.value.clause in ("order-divisibility", "support-smoothness")

    with pytest.raises(DomainError):
        certify(3, 6, 720720)  # shares a factor with q


def test_monotone_growth_when_extending_support():
    base = certify(3, 7, 720720)
    grown = certify(3, 133, 720720)
    assert grown.i_q >= base.i_q
