"""Prime table against trial division and classical identities."""

import math

import numpy as np
import pytest

from sievelab import (
    CapacityError,
    PreconditionError,
    euler_phi_int,
    is_probable_prime,
    primorial,
    sieve,
)
from sievelab.arith import SIEVE_CAP


def _trial_division_primes(limit):
    out = []
    for n in range(2, limit + 1):
        if all(n % d for d in range(2, math.isqrt(n) + 1)):
            out.append(n)
    return out


def test_primes_match_trial_division_small():
    table = sieve(2_000)
    assert table.primes_upto(2_000).tolist() == _trial_division_primes(2_000)


def test_prime_count_to_one_million(table_1m):
    assert int(table_1m.primes_upto(1_000_000).size) == 78_498


def test_smallest_prime_factor_exhaustive_small(table_10k):
    for n in range(2, 3_000):
        expect = next(d for d in range(2, n + 1) if n % d == 0)
        assert table_10k.smallest_prime_factor(n) == expect


def test_factorize_recombines(table_10k):
    rng = np.random.default_rng(7)
    for n in rng.integers(2, 10_000, size=200):
        n = int(n)
        fac = table_10k.factorize(n)
        prod = 1
        for p, e in fac:
            assert table_10k.is_prime(p)
            prod *= p**e
        assert prod == n


def test_mobius_by_definition(table_10k):
    for n in range(1, 500):
        fac = table_10k.factorize(n)
        if any(e > 1 for _, e in fac):
            expect = 0
        else:
            expect = (-1) ** len(fac)
        assert table_10k.mobius(n) == expect


def test_euler_phi_by_gcd_count(table_10k):
    for n in range(1, 200):
        expect = sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)
        assert table_10k.euler_phi(n) == expect
        assert euler_phi_int(n) == expect


def test_primorial_values():
    assert primorial(1) == 1  # empty product
    assert primorial(2) == 2
    assert primorial(10) == 210
    assert primorial(13) == 30_030
    with pytest.raises(PreconditionError):
        primorial(-1)


def test_probable_prime_agrees_with_table(table_10k):
    for n in range(2, 10_000):
        assert is_probable_prime(n) == table_10k.is_prime(n)


def test_probable_prime_large_composites():
    # Carmichael numbers fool Fermat but not the strong test.
    for n in (561, 1105, 1729, 2465, 2821, 6601, 8911, 10585, 75361):
        assert not is_probable_prime(n)
    assert is_probable_prime(2**61 - 1)


def test_sieve_capacity_gate():
    with pytest.raises(CapacityError):
        sieve(SIEVE_CAP + 1)
    with pytest.raises(CapacityError):
        sieve(1)


def test_lpf_beyond_table_limit(table_10k):
    # Above the tabled range the lookup falls back to trial division by
    # the tabled primes, which stays exact up to limit**2.
    assert table_10k.smallest_prime_factor(10_001) == 73
    assert table_10k.smallest_prime_factor(99_991) == 99_991
    assert table_10k.smallest_prime_factor(9_999_991 * 3) == 3
    with pytest.raises(PreconditionError):
        table_10k.smallest_prime_factor(1)
