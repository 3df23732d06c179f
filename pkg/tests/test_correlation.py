"""Correlation averages against direct loops, and the exact Euler-factor
algebra against its ungrouped definition."""

import itertools
import math
import random
from fractions import Fraction

import pytest

from sievelab import (
    CapacityError,
    HTuple,
    IntPolynomial,
    LinearFormSystem,
    PreconditionError,
    ZMatrix,
    build_evaluator,
    choose_parameters,
    empirical_correlation,
    euler_factor_ep,
    euler_factor_ep_prime,
    euler_product_experiment,
    local_factor,
    parse_polynomial_list,
    polynomial_forms_average,
    sieve,
    tidy_sum,
)


def test_single_shift_equals_mean(ev_single):
    n = ev_single.ctx.N
    rep = empirical_correlation(ev_single, [0], n)
    assert rep.average == ev_single.mean(n)


def test_average_matches_direct_loop(ev_pair):
    shifts = [0, 2, 5]
    n = 700
    rep = empirical_correlation(ev_pair, shifts, n)
    brute = [
        math.prod(ev_pair.value_at(x + r) for r in shifts)
        for x in range(1, n + 1)
    ]
    assert math.isclose(rep.average, math.fsum(brute) / n, rel_tol=1e-12)


def test_report_bookkeeping(ev_pair):
    ctx = ev_pair.ctx
    rep = empirical_correlation(ev_pair, [0, 3], 2_000)
    # Constants differ by 3W = 6; the only sieved odd prime 3 divides it.
    assert rep.bad_primes == (3,)
    assert math.isclose(rep.bad_prime_sum, 1 / 3)
    assert math.isclose(rep.bad_correction_scale, math.exp(1 / 3))
    assert rep.predicted_main == 1.0
    assert rep.edge_fraction == 3 / 2_000
    assert rep.size_threshold == ctx.R ** (4 * ctx.k * 2 + 1)
    assert rep.context is ctx


def test_shift_validation(ev_single):
    with pytest.raises(PreconditionError):
        empirical_correlation(ev_single, [], 100)
    # nu(0) exists, so a shift of -1 is legal at x = 1; -2 reads below 0.
    empirical_correlation(ev_single, [-1], 100)
    with pytest.raises(PreconditionError):
        empirical_correlation(ev_single, [-2], 100)
    with pytest.raises(PreconditionError):
        empirical_correlation(ev_single, [0], 0)


def test_poly_forms_is_mean_of_correlations(ev_single):
    polys = parse_polynomial_list("y,2*y")
    n = 1_500
    h = 6
    rep = polynomial_forms_average(ev_single, polys, h, n)
    per_l = []
    for l in range(1, h + 1):
        shifts = [q.evaluate(l) for q in polys]
        per_l.append(empirical_correlation(ev_single, shifts, n).average)
    assert rep.grid_averages == tuple(per_l)
    assert math.isclose(rep.average, math.fsum(per_l) / h, rel_tol=1e-15)
    assert rep.dims == 1


def test_poly_forms_rejects_constant_difference(ev_single):
    y = IntPolynomial.variable(0)
    with pytest.raises(PreconditionError):
        polynomial_forms_average(ev_single, [y, y + 2], 4, 500)


def test_poly_forms_grid_capacity(ev_single):
    x0 = IntPolynomial.variable(0, nvars=2)
    x1 = IntPolynomial.variable(1, nvars=2)
    with pytest.raises(CapacityError):
        polynomial_forms_average(ev_single, [x0, x0 + x1], 1_001, 100)


def test_tidy_sum_against_brute_force(table_10k):
    y = IntPolynomial.variable(0)
    delta = 6 * y * y - 4 * y
    limit = 200
    rep = tidy_sum(delta, 50, limit, table=table_10k)
    primes = [int(p) for p in table_10k.primes_upto(limit)]
    skip = set(rep.vanishing_primes)
    total = 0.0
    zeros = 0
    for l in range(1, 51):
        v = delta.evaluate(l)
        if v == 0:
            zeros += 1
            continue
        total += sum(
            math.log(p) / p for p in primes if p not in skip and v % p == 0
        )
    assert rep.zero_value_count == zeros
    assert math.isclose(rep.average, total / 50, rel_tol=1e-12)
    # content(6y^2 - 4y) = 2, so only p = 2 divides every value.
    assert rep.vanishing_primes == (2,)


def test_tidy_sum_saturates_toward_limit_sum(table_10k):
    y = IntPolynomial.variable(0)
    limit = 1_000
    rep_small = tidy_sum(y, 100, limit, table=table_10k)
    rep_mid = tidy_sum(y, 1_000, limit, table=table_10k)
    rep_big = tidy_sum(y, 10_000, limit, table=table_10k)
    # Each prime p <= limit divides a 1/p share of the grid, so the
    # average climbs toward sum log(p)/p^2 as h grows past the window.
    saturation = sum(
        math.log(p) / p**2 for p in (int(q) for q in table_10k.primes_upto(limit))
    )
    assert rep_small.average < rep_mid.average < rep_big.average
    assert abs(rep_big.average - saturation) < 0.01


def _ungrouped_euler_factor(sys_, p, z):
    """Literal 4^{kJ} enumeration over (m, m') subset pairs; densities by
    the definition-shaped grid route."""
    forms = sys_.forms()
    size = sys_.size
    total = 0.0 + 0.0j
    for m in range(1 << size):
        for mp in range(1 << size):
            active = [u for u in range(size) if (m >> u) & 1 or (mp >> u) & 1]
            c = local_factor([forms[u] for u in active], p)
            if c == 0:
                continue
            term = complex(float(Fraction(c)))
            for u in range(size):
                if (m >> u) & 1:
                    term *= -(p ** -z.z(u))
                if (mp >> u) & 1:
                    term *= -(p ** -z.z_prime(u))
            total += term
    return total


def test_euler_factor_matches_ungrouped_enumeration():
    rng = random.Random(7)
    systems = [
        LinearFormSystem(W=2, b=1, shifts=(0,), offsets=(0,)),
        LinearFormSystem(W=2, b=1, shifts=(0, 2), offsets=(0, 6)),
        LinearFormSystem(W=6, b=5, shifts=(0, 1), offsets=(0,)),
    ]
    for sys_ in systems:
        for _ in range(4):
            xi = [
                [rng.uniform(-3, 3) for _ in range(sys_.j_count)]
                for _ in range(sys_.k)
            ]
            xi_p = [
                [rng.uniform(-3, 3) for _ in range(sys_.j_count)]
                for _ in range(sys_.k)
            ]
            z = ZMatrix.of(rng.uniform(2, 20), xi, xi_p)
            for p in (3, 5, 13):
                got = euler_factor_ep(sys_, p, z)
                expect = _ungrouped_euler_factor(sys_, p, z)
                assert abs(got - expect) < 1e-12, (sys_, p)


def test_euler_factor_is_one_at_small_primes():
    ctx = choose_parameters(10**5, HTuple.of([0, 2]), 1, 0.4, eta0=1 / 9, w=5)
    assert ctx.W == 30
    sys_ = LinearFormSystem.from_context(ctx, [0])
    z = ZMatrix.zero(ctx.log_R, sys_.k, sys_.j_count)
    for p in (2, 3, 5):
        assert euler_factor_ep(sys_, p, z) == 1.0 + 0.0j


def test_euler_factor_size_cap():
    sys_ = LinearFormSystem(
        W=2, b=1, shifts=(0, 2, 6, 8, 12), offsets=(0, 4)
    )
    assert sys_.size == 10
    z = ZMatrix.zero(5.0, sys_.k, sys_.j_count)
    with pytest.raises(CapacityError):
        euler_factor_ep(sys_, 3, z)


def test_ep_prime_termwise():
    rng = random.Random(13)
    for _ in range(20):
        k, j = rng.randint(1, 2), rng.randint(1, 2)
        xi = [[rng.uniform(-2, 2) for _ in range(j)] for _ in range(k)]
        xi_p = [[rng.uniform(-2, 2) for _ in range(j)] for _ in range(k)]
        z = ZMatrix.of(rng.uniform(2, 30), xi, xi_p)
        p = rng.choice([2, 3, 5, 7, 11, 101])
        got = euler_factor_ep_prime(p, z)
        expect = 1.0 + 0.0j
        for u in range(k * j):
            a = p ** -(1 + z.z(u))
            b = p ** -(1 + z.z_prime(u))
            ab = p ** -(1 + z.z(u) + z.z_prime(u))
            expect *= (1 - a) * (1 - b) / (1 - ab)
        assert abs(got - expect) < 1e-12


def test_euler_product_experiment_shrinks():
    sys_ = LinearFormSystem(W=2, b=1, shifts=(0,), offsets=(0,))
    z = ZMatrix.zero(10.0, 1, 1)
    rep = euler_product_experiment(sys_, z, 10_000)
    assert rep.target == 2.0  # (W/phi(W))^1 with W=2
    assert rep.small_prime_factors_one
    assert rep.bad_primes == ()
    assert len(rep.checkpoints) >= 2
    assert rep.cauchy_ok
    # The partial product is real for the zero-frequency matrix.
    final = rep.checkpoints[-1].partial_product
    assert abs(final.imag) < 1e-12


def test_zmatrix_validation():
    with pytest.raises(PreconditionError):
        ZMatrix.zero(0.0, 1, 1)
    with pytest.raises(PreconditionError):
        ZMatrix.of(5.0, [[0.0], [0.0, 1.0]], [[0.0], [0.0]])
    with pytest.raises(PreconditionError):
        ZMatrix.of(5.0, [[math.nan]], [[0.0]])
    z = ZMatrix.zero(8.0, 2, 3)
    assert z.size == 6
    assert z.z(4) == (1.0 + 0.0j) / 8.0


def test_euler_factor_shape_mismatch():
    sys_ = LinearFormSystem(W=2, b=1, shifts=(0, 2), offsets=(0,))
    z = ZMatrix.zero(5.0, 2, 2)
    with pytest.raises(PreconditionError):
        euler_factor_ep(sys_, 3, z)
