"""Polynomial progression counting and searching.

lambda_count is the normalized double average E_y E_x f(x+P_1(y)) ... f(x+P_t(y))
with f extended by zero outside its table; because f is non-negative, the
average is positive exactly when some configuration lands entirely in the
support, which is what the search routines enumerate.  run_pipeline chains
the whole construction: sieve the set, pick the residue class, scale the
indicator, rescale the polynomials by W, then count and search over the
identical ranges and insist the two agree.
"""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .arith import PrimeTable, is_probable_prime, sieve
from .errors import CapacityError, PreconditionError
from .polynomials import IntPolynomial
from .wtrick import (
    IndicatorTable,
    MaynardParams,
    ResidueSelection,
    SieveContext,
    build_maynard_set,
    build_scaled_indicator,
    choose_parameters,
    select_residue,
)

SEARCH_CELL_CAP = 5 * 10**8


@dataclass(frozen=True)
class ProgressionHit:
    """One found configuration: base point, argument, and the hit values.

    values lists every member of the configuration in polynomial order
    (for gap searches: all x + P_j(y) first, then their +gap partners).
    Construction sites verify each value's claimed membership before
    building the hit; the dataclass itself is just the record.
    """

    x0: int
    y0: int
    values: tuple[int, ...]
    gap: int | None = None


def _checked_hit(
    x0: int,
    y0: int,
    values: Iterable[int],
    member: Callable[[int], bool],
    gap: int | None = None,
) -> ProgressionHit:
    values = tuple(int(v) for v in values)
    for v in values:
        if not member(v):
            raise PreconditionError(
                f"hit ({x0}, {y0}) lists {v}, which fails verification"
            )
    return ProgressionHit(x0=x0, y0=y0, values=values, gap=gap)


# ─── the counting operator ────────────────────────────────────────────────


def lambda_count(
    f: IndicatorTable, polys: Sequence[IntPolynomial], m_range: int
) -> float:
    """E_{y in [m_range]} E_{x in [n]} of prod_j f(x + P_j(y)).

    f is zero outside [1, n], so each y contributes a window of x where
    every shifted read stays in range; everything else vanishes exactly.
    Inner sums are numpy pairwise reductions, combined across y by fsum,
    and the empty-window case contributes a clean 0.
    """
    polys = list(polys)
    if not polys:
        raise PreconditionError("lambda_count needs at least one polynomial")
    if any(q.nvars != 1 for q in polys):
        raise PreconditionError("shift polynomials must be univariate")
    if m_range < 1:
        raise PreconditionError(f"m_range must be >= 1, got {m_range}")
    n = f.n
    dense = f.dense()
    per_y: list[float] = []
    for y in range(1, m_range + 1):
        shifts = [q.evaluate(y) for q in polys]
        lo = max(1, 1 - min(shifts))
        hi = min(n, n - max(shifts))
        if lo > hi:
            per_y.append(0.0)
            continue
        prod = dense[lo + shifts[0] : hi + shifts[0] + 1].copy()
        for s in shifts[1:]:
            prod *= dense[lo + s : hi + s + 1]
        per_y.append(float(np.sum(prod)))
    return math.fsum(per_y) / (n * m_range)


def rescale_polys(
    polys: Sequence[IntPolynomial], W: int
) -> list[IntPolynomial]:
    """Map each P to Q(y) = P(W*y)/W, which is integral when P(0) = 0.

    Monomial a*y^i becomes a*W^(i-1)*y^i.  The identity W*Q = P(W*y) is
    re-asserted symbolically on every call; it is cheap and makes the
    integrality claim self-checking rather than trusted.
    """
    if W < 1:
        raise PreconditionError(f"W must be >= 1, got {W}")
    out: list[IntPolynomial] = []
    for q in polys:
        if q.nvars != 1:
            raise PreconditionError("rescaling is defined for univariate polynomials")
        if q.constant_term() != 0:
            raise PreconditionError(
                f"polynomial {q} has nonzero constant term; needs P(0) = 0"
            )
        terms = {
            (e,): a * W ** (e - 1) for (e,), a in q.terms().items()
        }
        scaled = IntPolynomial(1, terms)
        if scaled * W != q.scale_variable(0, W):
            raise PreconditionError(f"rescaling {q} by {W} lost integrality")
        out.append(scaled)
    return out


# ─── searches ─────────────────────────────────────────────────────────────


def search_in_a(
    a_sorted: Sequence[int],
    polys: Sequence[IntPolynomial],
    x_max: int,
    y_max: int,
    first_only: bool = False,
) -> list[ProgressionHit]:
    """All (x, y) in [1, x_max] x [1, y_max] with every x + P_j(y) in A.

    A must be sorted ascending; membership is binary search.  Results are
    in lexicographic (y, x) order, and each hit's values are re-verified
    against A by bisect before the hit is constructed.  first_only stops
    at the first hit, for existence-only queries.
    """
    polys = list(polys)
    if not polys:
        raise PreconditionError("search needs at least one polynomial")
    if x_max < 1 or y_max < 1:
        raise PreconditionError("search ranges must be >= 1")
    arr = np.asarray(a_sorted, dtype=np.int64)
    if arr.size == 0:
        return []
    if np.any(arr[1:] <= arr[:-1]):
        raise PreconditionError("A must be sorted strictly ascending")
    if x_max * len(polys) * y_max > SEARCH_CELL_CAP:
        raise CapacityError("search grid exceeds the cell budget")

    seq = [int(v) for v in arr]

    def member(v: int) -> bool:
        i = bisect.bisect_left(seq, v)
        return i < len(seq) and seq[i] == v

    hits: list[ProgressionHit] = []
    xs = np.arange(1, x_max + 1, dtype=np.int64)
    for y in range(1, y_max + 1):
        ok = np.ones(xs.size, dtype=bool)
        for q in polys:
            vals = xs + q.evaluate(y)
            idx = np.minimum(np.searchsorted(arr, vals), arr.size - 1)
            ok &= arr[idx] == vals
            if not ok.any():
                break
        for x in xs[ok]:
            x = int(x)
            hits.append(
                _checked_hit(
                    x, y, (x + q.evaluate(y) for q in polys), member
                )
            )
            if first_only:
                return hits
    return hits


def search_bounded_gap(
    polys: Sequence[IntPolynomial],
    b_max: int,
    x_max: int,
    y_max: int,
    table: PrimeTable | None = None,
    first_only: bool = False,
) -> list[ProgressionHit]:
    """All (x, y, b) with x+P_j(y) and x+P_j(y)+b prime for every j.

    Ordered by (b, y, x) with 1 <= b <= b_max.  Candidate primality is a
    table lookup; each constructed hit is re-verified with the independent
    strong-pseudoprime test, so a sieve bug cannot silently fabricate
    output.  values holds the 2t members: the base configuration, then the
    shifted one.  first_only stops at the first hit.
    """
    polys = list(polys)
    if not polys:
        raise PreconditionError("search needs at least one polynomial")
    if b_max < 1 or x_max < 1 or y_max < 1:
        raise PreconditionError("search ranges must be >= 1")
    if b_max * x_max * y_max * len(polys) > SEARCH_CELL_CAP:
        raise CapacityError("search grid exceeds the cell budget")
    top = x_max + b_max
    for q in polys:
        top += max(abs(q.evaluate(y)) for y in range(1, y_max + 1))
    if table is None or table.limit < top:
        table = sieve(max(16, top))
    lpf = table.lpf
    xs = np.arange(1, x_max + 1, dtype=np.int64)

    hits: list[ProgressionHit] = []
    for b in range(1, b_max + 1):
        for y in range(1, y_max + 1):
            ok = np.ones(xs.size, dtype=bool)
            base_vals = []
            for q in polys:
                vals = xs + q.evaluate(y)
                base_vals.append(vals)
                for v in (vals, vals + b):
                    good = (v >= 2) & (lpf[np.clip(v, 0, table.limit)] == v)
                    ok &= good
                if not ok.any():
                    break
            for i in np.flatnonzero(ok):
                x = int(xs[i])
                members = [int(v[i]) for v in base_vals]
                members += [m + b for m in members]
                hits.append(
                    _checked_hit(x, y, members, is_probable_prime, gap=b)
                )
                if first_only:
                    return hits
    return hits


# ─── the full construction, end to end ────────────────────────────────────


@dataclass(frozen=True)
class PipelineReport:
    """Everything one end-to-end run produced, for serialization.

    consistency_ok asserts the exact finite-sum equivalence: the counting
    average is positive iff the search over the identical ranges found a
    configuration.  Hits are reported in original coordinates (x0 = W*x+b,
    y0 = W*y) with their values drawn from the sieved set itself.
    """

    context: SieveContext
    selection: ResidueSelection
    set_size: int
    support_size: int
    polys: tuple[IntPolynomial, ...]
    rescaled: tuple[IntPolynomial, ...]
    m_range: int
    lambda_value: float
    hits: tuple[ProgressionHit, ...]
    consistency_ok: bool
    runtime_seconds: float


def run_pipeline(
    nprime: int,
    offsets,
    m: int,
    epsilon0: float,
    polys: Sequence[IntPolynomial],
    m_range: int,
    *,
    jmax: int = 1,
    w: int | None = None,
    eta0: float | None = None,
    c0: float | None = None,
    b: int | None = None,
    table: PrimeTable | None = None,
) -> PipelineReport:
    """Build the set, scale the indicator, count, search, cross-check.

    The search runs over exactly the ranges the counting average sums,
    x in [1, N] and y in [1, m_range], in rescaled coordinates; a positive
    average with an empty search (or the reverse) would mean the two
    disagree about the same finite sum, so the report carries that
    consistency bit and the tests fail on it.

    Every polynomial must have P(0) = 0; this is what makes the W-rescaling
    integral and keeps configurations inside one residue class.  jmax
    defaults to 1 rather than len(polys): tying the eta0 budget to the
    polynomial count is what the asymptotic regime wants, but at desk
    scale it usually drives R below 2, so the coupling is opt-in.
    """
    start = time.perf_counter()
    polys = tuple(polys)
    if not polys:
        raise PreconditionError("pipeline needs at least one polynomial")
    for q in polys:
        if q.nvars != 1 or q.constant_term() != 0:
            raise PreconditionError(
                f"polynomial {q} must be univariate with P(0) = 0"
            )
    ctx = choose_parameters(
        nprime, offsets, m, epsilon0, jmax=jmax, w=w, eta0=eta0, c0=c0, b=b
    )
    if table is None or table.limit < nprime + offsets.h[-1]:
        table = sieve(nprime + offsets.h[-1])
    members = build_maynard_set(ctx.params, table)
    selection = select_residue(members, ctx)
    if b is None and selection.b != ctx.b:
        ctx = ctx.with_residue(selection.b)
    f = build_scaled_indicator(members, ctx)
    rescaled = rescale_polys(polys, ctx.W)
    lam = lambda_count(f, rescaled, m_range)

    member_set = set(int(v) for v in members)
    positions = np.sort(f.positions)
    hits: list[ProgressionHit] = []
    for y in range(1, m_range + 1):
        shifts = [q.evaluate(y) for q in rescaled]
        # x + shifts[0] must sit in the support, so walk the support
        # instead of all of [1, N]; the other shifts filter by search.
        cand = positions - shifts[0]
        cand = cand[(cand >= 1) & (cand <= ctx.N)]
        ok = np.ones(cand.size, dtype=bool)
        for s in shifts[1:]:
            vals = cand + s
            idx = np.minimum(np.searchsorted(positions, vals), positions.size - 1)
            ok &= positions[idx] == vals
            if not ok.any():
                break
        for x in cand[ok]:
            x = int(x)
            x0 = ctx.W * x + ctx.b
            y0 = ctx.W * y
            hits.append(
                _checked_hit(
                    x0,
                    y0,
                    (x0 + q.evaluate(y0) for q in polys),
                    member_set.__contains__,
                )
            )
    consistency = (lam > 0) == bool(hits)
    return PipelineReport(
        context=ctx,
        selection=selection,
        set_size=int(members.size),
        support_size=f.count,
        polys=polys,
        rescaled=tuple(rescaled),
        m_range=m_range,
        lambda_value=lam,
        hits=tuple(hits),
        consistency_ok=consistency,
        runtime_seconds=time.perf_counter() - start,
    )
