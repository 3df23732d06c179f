"""Counting average against the double loop, searches against hand-checked
fixtures, and the end-to-end pipeline consistency bit."""

import math

import numpy as np
import pytest

from sievelab import (
    HTuple,
    IntPolynomial,
    PreconditionError,
    build_maynard_set,
    build_scaled_indicator,
    choose_parameters,
    is_probable_prime,
    lambda_count,
    parse_polynomial_list,
    rescale_polys,
    run_pipeline,
    search_bounded_gap,
    search_in_a,
)


def _brute_lambda(f, polys, m_range):
    dense = f.dense()
    total = 0.0
    for y in range(1, m_range + 1):
        for x in range(1, f.n + 1):
            term = 1.0
            for q in polys:
                t = x + q.evaluate(y)
                if not 1 <= t <= f.n:
                    term = 0.0
                    break
                term *= dense[t]
            total += term
    return total / (f.n * m_range)


def test_lambda_matches_double_loop(table_10k):
    ctx = choose_parameters(2_000, HTuple.of([0]), 0, 0.5, eta0=0.15)
    members = build_maynard_set(ctx.params, table_10k)
    f = build_scaled_indicator(members, ctx)
    for spec_text, m_range in (("y", 5), ("y,2*y", 8), ("y^2", 6)):
        polys = parse_polynomial_list(spec_text)
        got = lambda_count(f, polys, m_range)
        expect = _brute_lambda(f, polys, m_range)
        assert math.isclose(got, expect, rel_tol=1e-9), spec_text


def test_lambda_validation(table_10k):
    ctx = choose_parameters(2_000, HTuple.of([0]), 0, 0.5, eta0=0.15)
    members = build_maynard_set(ctx.params, table_10k)
    f = build_scaled_indicator(members, ctx)
    with pytest.raises(PreconditionError):
        lambda_count(f, [], 5)
    with pytest.raises(PreconditionError):
        lambda_count(f, parse_polynomial_list("y"), 0)


def test_rescale_matches_substitution():
    rng = np.random.default_rng(19)
    y = IntPolynomial.variable(0)
    for _ in range(100):
        w = int(rng.integers(1, 60))
        coeffs = rng.integers(-9, 10, size=int(rng.integers(1, 4)))
        q = IntPolynomial.constant(0)
        power = y
        for c in coeffs:
            q = q + int(c) * power
            power = power * y
        if q.is_zero:
            continue
        (scaled,) = rescale_polys([q], w)
        for v in range(-6, 7):
            assert w * scaled.evaluate(v) == q.evaluate(w * v)


def test_rescale_rejects_nonzero_constant_term():
    y = IntPolynomial.variable(0)
    with pytest.raises(PreconditionError):
        rescale_polys([y + 1], 2)


def test_search_in_a_prime_fixture(table_10k):
    primes = table_10k.primes_upto(500)
    polys = parse_polynomial_list("y^2,2*y^2")
    hits = search_in_a(primes, polys, 100, 10)
    assert any(h.x0 == 3 and h.y0 == 2 for h in hits)
    hit = next(h for h in hits if (h.x0, h.y0) == (3, 2))
    assert hit.values == (7, 11)
    # Lexicographic (y, x) order within the returned list.
    keys = [(h.y0, h.x0) for h in hits]
    assert keys == sorted(keys)
    # Every reported configuration really lies in the set.
    pset = set(primes.tolist())
    for h in hits:
        assert all(v in pset for v in h.values)


def test_search_in_a_first_only(table_10k):
    primes = table_10k.primes_upto(500)
    polys = parse_polynomial_list("y^2,2*y^2")
    all_hits = search_in_a(primes, polys, 100, 10)
    first = search_in_a(primes, polys, 100, 10, first_only=True)
    assert len(first) == 1
    assert (first[0].y0, first[0].x0) == min((h.y0, h.x0) for h in all_hits)


def test_search_in_a_empty_set():
    polys = parse_polynomial_list("y")
    assert search_in_a(np.array([], dtype=np.int64), polys, 10, 3) == []


def test_search_in_a_requires_sorted():
    polys = parse_polynomial_list("y")
    with pytest.raises(PreconditionError):
        search_in_a(np.array([5, 3, 11]), polys, 10, 3)


def test_bounded_gap_fixture_contains_squares_pair():
    polys = parse_polynomial_list("y^2")
    hits = search_bounded_gap(polys, 246, 100, 10)
    match = [h for h in hits if (h.x0, h.y0, h.gap) == (3, 2, 4)]
    assert match
    assert match[0].values == (7, 11)
    # Order is (b, y, x).
    keys = [(h.gap, h.y0, h.x0) for h in hits]
    assert keys == sorted(keys)
    for h in hits:
        assert all(is_probable_prime(v) for v in h.values)


def test_bounded_gap_tiny_window():
    # b = 1 forces consecutive primes v, v+1: only (2, 3) qualifies.
    polys = parse_polynomial_list("y")
    hits = search_bounded_gap(polys, 1, 10, 2)
    assert hits
    for h in hits:
        assert h.values == (2, 3)


def test_bounded_gap_first_only():
    polys = parse_polynomial_list("y^2")
    first = search_bounded_gap(polys, 246, 100, 10, first_only=True)
    assert len(first) == 1


def test_pipeline_desk_instance():
    polys = parse_polynomial_list("y,2*y")
    rep = run_pipeline(100_000, HTuple.of([0, 2]), 1, 0.4, polys, 8, eta0=1 / 9)
    assert rep.consistency_ok
    assert (rep.lambda_value > 0) == bool(rep.hits)
    assert rep.context.W == 2
    # Hits are reported in original coordinates with verified membership.
    for h in rep.hits[:10]:
        assert h.x0 % rep.context.W == rep.context.b % rep.context.W
        assert h.y0 % rep.context.W == 0
    assert rep.set_size >= rep.support_size


def test_pipeline_membership_cross_checked(table_1m):
    polys = parse_polynomial_list("y,2*y")
    rep = run_pipeline(
        100_000, HTuple.of([0, 2]), 1, 0.4, polys, 8, eta0=1 / 9, table=table_1m
    )
    members = set(
        build_maynard_set(rep.context.params, table_1m).tolist()
    )
    for h in rep.hits:
        assert set(h.values) <= members


def test_pipeline_rejects_nonvanishing_origin():
    polys = parse_polynomial_list("y+1")
    with pytest.raises(PreconditionError):
        run_pipeline(100_000, HTuple.of([0, 2]), 1, 0.4, polys, 8, eta0=1 / 9)


def test_pipeline_empty_search_is_consistent(table_1m):
    # The second shift exceeds the scaled window (N = 50000) at every y,
    # so the average and the search must both come up empty, in agreement.
    polys = parse_polynomial_list("y,50000*y")
    rep = run_pipeline(
        100_000, HTuple.of([0, 2]), 1, 0.4, polys, 8, eta0=1 / 9, table=table_1m
    )
    assert rep.lambda_value == 0.0
    assert rep.hits == ()
    assert rep.consistency_ok
