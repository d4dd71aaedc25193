import pytest

from rankstats.sieve import PrimeTable


@pytest.fixture(scope="session")
def table_1e5():
    return PrimeTable(10**5)


@pytest.fixture(scope="session")
def table_1e6():
    return PrimeTable(10**6)
