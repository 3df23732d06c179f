"""Fast exact-oracle self checks, one printed line per check.

These are the desk-sized sanity invariants that must hold on any machine
before trusting longer experiments: sieve vs trial division, the frozen
cutoff normalization, dual-path majorant agreement, exact local factors,
and the small search fixtures.  Everything here runs in seconds and uses
no randomness beyond fixed seeds.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np

from .admissible import HTuple, is_admissible, search_narrow_tuple, wtrick_residues
from .arith import euler_phi_int, is_probable_prime, primorial, sieve
from .correlation import ZMatrix, empirical_correlation, euler_factor_ep
from .cutoff import normalize_cutoff, normalize_cutoff_reference
from .local_factors import (
    LinearFormSystem,
    alpha_density,
    bad_primes_linear,
    classify_prime,
    linear_local_factor,
    local_factor,
)
from .majorant import build_evaluator
from .polynomials import IntPolynomial, parse_polynomial_list
from .progressions import lambda_count, search_bounded_gap
from .wtrick import build_maynard_set, build_scaled_indicator, choose_parameters


def _check_sieve() -> None:
    table = sieve(10_000)
    count = 0
    for n in range(2, 10_001):
        if all(n % d for d in range(2, int(math.isqrt(n)) + 1)):
            count += 1
            assert table.is_prime(n), f"sieve missed prime {n}"
        else:
            assert not table.is_prime(n), f"sieve claims composite {n} prime"
    assert count == 1229, f"pi(10^4) = {count} != 1229"
    assert table.smallest_prime_factor(9991) == 97
    assert primorial(11) == 2310
    assert euler_phi_int(30) == 8
    assert is_probable_prime(2_147_483_647) and not is_probable_prime(10**12 + 1)


def _check_admissible() -> None:
    good = is_admissible(HTuple.of([0, 2, 6]))
    assert good.admissible and good.witness is not None
    bad = is_admissible(HTuple.of([0, 2, 4]))
    assert not bad.admissible and bad.covering_prime == 3
    assert wtrick_residues(HTuple.of([0, 2, 6]), 30) == [11, 17]
    found = search_narrow_tuple(3, 6)
    assert found.ok and found.tuple.diameter <= 6


def _check_cutoff() -> None:
    chi = normalize_cutoff()
    ref = normalize_cutoff_reference()
    assert abs(chi.d_const - ref) < 1e-8, f"|{chi.d_const} - {ref}| >= 1e-8"
    assert chi.chi0 > 0.5


def _check_majorant_paths() -> None:
    ctx = choose_parameters(10**5, HTuple.of([0, 2]), 1, 0.4, eta0=1 / 9)
    ev = build_evaluator(ctx)
    bulk = ev.values_range(1, 512)
    for x in range(1, 513):
        point = ev.value_at(x)
        assert point == bulk[x - 1], f"dual-path mismatch at x={x}"


def _check_local_factors() -> None:
    x = IntPolynomial.variable(0)
    assert local_factor([x, x + 1], 5) == Fraction(0)
    assert local_factor([x], 7) == Fraction(1, 7)
    assert local_factor([], 13) == Fraction(1)
    sys_ = LinearFormSystem(W=6, b=5, shifts=(0, 2), offsets=(0, 6))
    for p in (5, 7, 11, 13):
        fast = linear_local_factor(sys_, p, range(sys_.size))
        slow = local_factor(list(sys_.forms()), p)
        assert fast == slow, f"fast path disagrees at p={p}"
    bad = set(bad_primes_linear(sys_, 100).primes)
    flagged = {
        p
        for p in sieve(100).primes_upto(100).tolist()
        if sys_.W % p and classify_prime(sys_, p).is_bad
    }
    assert bad == flagged, f"classification mismatch: {bad} vs {flagged}"


def _check_alpha() -> None:
    y = IntPolynomial.variable(0)
    constraints = [(4, y - 1), (3, y - 2), (5, y)]
    dens = alpha_density(constraints)
    lcm = 60
    hits = sum(
        1 for n in range(lcm) if n % 4 == 1 and n % 3 == 2 and n % 5 == 0
    )
    assert dens == Fraction(hits, lcm), f"{dens} != {hits}/{lcm}"


def _check_euler() -> None:
    ctx = choose_parameters(10**5, HTuple.of([0, 2]), 1, 0.4, eta0=1 / 9, w=3)
    sys_ = LinearFormSystem.from_context(ctx, [0])
    z = ZMatrix.zero(ctx.log_R, sys_.k, sys_.j_count)
    for p in (2, 3):
        val = euler_factor_ep(sys_, p, z)
        assert abs(val - 1.0) < 1e-15, f"E_p != 1 at small prime {p}"


def _check_correlation_mean() -> None:
    ctx = choose_parameters(10**4, HTuple.of([0]), 0, 0.5, eta0=0.1)
    ev = build_evaluator(ctx)
    rep = empirical_correlation(ev, [0], ctx.N)
    assert rep.average == ev.mean(ctx.N), "J=1 correlation != mean"


def _check_lambda_and_search() -> None:
    ctx = choose_parameters(10**4, HTuple.of([0]), 0, 0.5, eta0=0.1)
    table = sieve(10**4)
    members = build_maynard_set(ctx.params, table)
    f = build_scaled_indicator(members, ctx)
    polys = parse_polynomial_list("y,2*y")
    lam = lambda_count(f, polys, 8)
    dense = f.dense()
    brute = 0.0
    for y in range(1, 9):
        for xx in range(1, f.n + 1):
            term = 1.0
            for q in polys:
                t = xx + q.evaluate(y)
                if not 1 <= t <= f.n:
                    term = 0.0
                    break
                term *= dense[t]
            brute += term
    brute /= f.n * 8
    assert math.isclose(lam, brute, rel_tol=1e-9), f"{lam} != {brute}"

    hits = search_bounded_gap(parse_polynomial_list("y^2"), 246, 100, 10)
    assert any(h.x0 == 3 and h.y0 == 2 and h.gap == 4 for h in hits)


CHECKS: list[tuple[str, Callable[[], None]]] = [
    ("sieve vs trial division", _check_sieve),
    ("admissibility and residue classes", _check_admissible),
    ("cutoff normalization agreement", _check_cutoff),
    ("majorant pointwise vs bulk", _check_majorant_paths),
    ("exact local factors", _check_local_factors),
    ("congruence density vs enumeration", _check_alpha),
    ("unit Euler factors at small primes", _check_euler),
    ("single-shift correlation equals mean", _check_correlation_mean),
    ("lambda count and bounded-gap fixture", _check_lambda_and_search),
]


def run(out=None) -> int:
    """Run every check; print one status line each; return failure count."""
    import sys

    stream = out if out is not None else sys.stdout
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}", file=stream)
        else:
            print(f"ok   {name}", file=stream)
    if failures:
        print(f"{failures} of {len(CHECKS)} checks failed", file=stream)
    else:
        print(f"all {len(CHECKS)} checks passed", file=stream)
    return failures


if __name__ == "__main__":
    raise SystemExit(1 if run() else 0)
