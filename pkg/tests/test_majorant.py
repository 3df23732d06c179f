"""The two evaluation routes against each other and against a naive
all-divisors oracle, plus the majorization scan."""

import math

import numpy as np
import pytest

from sievelab import (
    CapacityError,
    HTuple,
    build_evaluator,
    build_maynard_set,
    build_scaled_indicator,
    choose_parameters,
    verify_majorization,
)
from sievelab.majorant import CHUNK


def _naive_nu(ev, x):
    """Third route: enumerate every squarefree product of sieved primes
    dividing the shifted value directly, no shared code with the
    evaluator's DFS."""
    ctx = ev.ctx
    prod = 1.0
    for h in ctx.offsets.h:
        n = ctx.W * x + ctx.b + h
        divisors = [(1, 1)]
        for p in ev.primes:
            if n % p == 0:
                divisors += [(d * p, -mu) for d, mu in divisors]
        s = sum(
            mu * ev.chi.value(math.log(d) / ctx.log_R)
            for d, mu in divisors
            if d < ctx.R
        )
        prod *= s * s
    return ev.scale * prod


def test_routes_agree_on_random_points(ev_pair):
    rng = np.random.default_rng(3)
    xs = sorted(int(v) for v in rng.integers(0, ev_pair.ctx.N, size=400))
    lo, hi = min(xs), max(xs)
    bulk = ev_pair.values_range(lo, hi)
    for x in xs:
        a = ev_pair.value_at(x)
        b = float(bulk[x - lo])
        assert a == b or abs(a - b) <= 1e-12 * abs(b), x


def test_routes_match_naive_oracle(ev_single):
    rng = np.random.default_rng(5)
    for x in rng.integers(0, ev_single.ctx.N, size=200):
        x = int(x)
        expect = _naive_nu(ev_single, x)
        got = ev_single.value_at(x)
        assert math.isclose(got, expect, rel_tol=1e-12, abs_tol=1e-300), x


def test_naive_oracle_multi_offset(table_1m):
    ctx = choose_parameters(30_000, HTuple.of([0, 2, 6]), 1, 0.4, eta0=1 / 13)
    ev = build_evaluator(ctx)
    rng = np.random.default_rng(9)
    for x in rng.integers(0, ctx.N, size=100):
        x = int(x)
        assert math.isclose(
            ev.value_at(x), _naive_nu(ev, x), rel_tol=1e-12, abs_tol=1e-300
        )


def test_nu_nonnegative_everywhere(ev_single):
    vals = ev_single.values_range(0, 5_000)
    assert float(vals.min()) >= 0.0


def test_mean_thread_independent(ev_pair):
    n = 3 * CHUNK + 1234  # force several chunks with a ragged tail
    one = ev_pair.mean(n, threads=1)
    four = ev_pair.mean(n, threads=4)
    assert one == four


def test_chunked_values_concatenate_to_range(ev_single):
    lo, hi = 17, 17 + 2 * CHUNK + 99
    chunks = ev_single.chunked_values(lo, hi, threads=3)
    stitched = np.concatenate(chunks)
    direct = ev_single.values_range(lo, hi)
    assert stitched.shape == direct.shape
    assert np.array_equal(stitched, direct)


def test_majorization_holds_on_pair_instance(ev_pair, table_1m):
    ctx = ev_pair.ctx
    members = build_maynard_set(ctx.params, table_1m)
    f = build_scaled_indicator(members, ctx)
    rep = verify_majorization(f, ev_pair)
    assert rep.violations == 0
    assert rep.ok
    assert rep.checked == f.count


def test_oversized_scale_produces_violations(table_1m):
    base = choose_parameters(100_000, HTuple.of([0, 2]), 1, 0.4, eta0=1 / 9)
    ctx = choose_parameters(
        100_000, HTuple.of([0, 2]), 1, 0.4, eta0=1 / 9, c0=base.c0 * 1e6
    )
    members = build_maynard_set(ctx.params, table_1m)
    f = build_scaled_indicator(members, ctx)
    ev = build_evaluator(ctx)
    rep = verify_majorization(f, ev)
    assert rep.violations > 0
    assert not rep.ok
    x, fx, nux = rep.first_violation
    assert fx > nux
    assert x in f.support_set()


def test_primes_below_r_capacity():
    # eta0 high enough to pull hundreds of primes under R must refuse
    # rather than silently truncate the subset masks.
    ctx = choose_parameters(10**13, HTuple.of([0]), 0, 0.9, eta0=0.2)
    with pytest.raises(CapacityError):
        build_evaluator(ctx)
