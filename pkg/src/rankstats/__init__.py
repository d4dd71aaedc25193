"""Rank statistics for the curve family y^2 + xy = x^3 - t^d over F_q(t).

Exact rank brackets via the divisor-sum invariant, structural censuses of
the primes and integers that feed it, and a constructor for certified
high-rank parameters.
"""

from .arith import (
    Factorization,
    OrderRecord,
    WORKING_BOUND,
    carmichael_lambda,
    divisors,
    euler_phi,
    factorize,
    is_prime,
    largest_prime_factor,
    lcm_upto,
    legendre_symbol,
    mult_order,
    valuation,
)
from .classify import (
    PrimeClass,
    UpClassification,
    classify_prime,
    classify_up,
    in_Q_pm,
    in_R_p,
    kummer_degree,
    member_up_direct_oracle,
    varpi_count,
)
from .errors import (
    DomainError,
    InsufficientInputError,
    RangeLimitError,
    VerificationError,
)
from .rank import (
    DpDecomposition,
    RankBracket,
    RankTerm,
    brumer_envelope,
    characteristic,
    dp_of,
    iq,
    orbit_count_oracle,
    phi_over_lambda_bound,
    rank_lower_bound,
)

__version__ = "0.1.0"
