"""Shifted-product averages of the majorant and their Euler-factor models.

Three layers live here.  empirical_correlation measures the average of
nu(x + r_1) * ... * nu(x + r_J) over x in [1, N] together with the bad
primes of the associated linear system, polynomial_forms_average repeats
that per point of a polynomial shift grid, and the euler_factor_* family
evaluates the exact per-prime factors whose product the correlation is
modeled by, with euler_product_experiment tracking that product against
(W/phi(W))^{kJ} on a fixed checkpoint schedule.

Averages reuse the evaluator's fixed chunk grid, so a single-shift
correlation at r = 0 reproduces MajorantEvaluator.mean bit for bit.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from math import isqrt
from typing import Iterable, Sequence

import numpy as np

from .arith import PrimeTable, euler_phi_int, is_probable_prime, sieve
from .errors import CapacityError, PreconditionError
from .local_factors import LinearFormSystem, bad_primes_linear, linear_local_factor
from .majorant import CHUNK, MajorantEvaluator
from .polynomials import IntPolynomial
from .wtrick import SieveContext

EULER_SIZE_CAP = 8
POLY_GRID_CAP = 10**6
CHECKPOINT_SCHEDULE = (100, 1_000, 10_000, 100_000)


# ─── shifted-product averages ─────────────────────────────────────────────


def _product_average(
    ev: MajorantEvaluator, shifts: Sequence[int], n: int, threads: int = 1
) -> float:
    """E_{x in [1, n]} of the product of nu over the shifted points.

    One bulk evaluation covers [1 + min r, n + max r]; each factor is a
    slice of that window, so no point is computed twice.  The final sum
    walks the same CHUNK grid as MajorantEvaluator.mean (anchored at the
    start of x-range), keeping the J = 1, r = 0 case bit-identical to it.
    """
    shifts = [int(r) for r in shifts]
    if not shifts:
        raise PreconditionError("need at least one shift")
    if n < 1:
        raise PreconditionError(f"average needs n >= 1, got {n}")
    lo = 1 + min(shifts)
    if lo < 0:
        raise PreconditionError(
            f"shift {min(shifts)} reads below 0 at x = 1"
        )
    hi = n + max(shifts)
    window = np.concatenate(ev.chunked_values(lo, hi, threads))
    first = window[1 + shifts[0] - lo : 1 + shifts[0] - lo + n]
    prod = first.copy()
    for r in shifts[1:]:
        off = 1 + r - lo
        prod *= window[off : off + n]
    sums = [float(np.sum(prod[a : a + CHUNK])) for a in range(0, n, CHUNK)]
    return math.fsum(sums) / n


@dataclass(frozen=True)
class CorrelationReport:
    """Measured shifted-product average plus its local obstruction data.

    The modeled shape is main term 1 plus a correction whose magnitude is
    driven by exp(sum of 1/p over bad primes); bad_correction_scale records
    that exponential with all absolute constants set to 1, as a comparison
    scale rather than a bound.  size_threshold is R^(4kJ+1), the window
    size above which the model is meant to apply; desk-scale runs usually
    sit below it, hence the explicit flag instead of an error.
    """

    shifts: tuple[int, ...]
    n: int
    average: float
    bad_primes: tuple[int, ...]
    bad_prime_sum: float
    degenerate_pairs: tuple[tuple[int, int], ...]
    predicted_main: float
    bad_correction_scale: float
    size_threshold: float
    size_condition_met: bool
    edge_fraction: float
    runtime_seconds: float
    context: SieveContext


def empirical_correlation(
    ev: MajorantEvaluator,
    shifts: Iterable[int],
    n: int,
    threads: int = 1,
    table: PrimeTable | None = None,
) -> CorrelationReport:
    """Average nu(x + r_1) * ... * nu(x + r_J) over x in [1, n].

    Shifted reads past n evaluate nu directly (it is defined on all of the
    naturals), so the only divergence from a hard-truncated average is the
    O(max |r| / n) edge band reported as edge_fraction.  The bad primes are
    scanned over the full range that can matter for the system, namely up
    to the largest nonzero pairwise difference of the form constants.
    """
    start = time.perf_counter()
    shifts = tuple(int(r) for r in shifts)
    average = _product_average(ev, shifts, n, threads)
    ctx = ev.ctx
    sys = LinearFormSystem.from_context(ctx, shifts)
    consts = sys.constants()
    max_diff = max(
        (abs(a - b) for a, b in itertools.combinations(consts, 2)),
        default=0,
    )
    report = bad_primes_linear(sys, max(2, max_diff), table)
    bad_sum = float(sum(1.0 / p for p in report.primes))
    k_j = ctx.k * len(shifts)
    try:
        threshold = float(ctx.R ** (4 * k_j + 1))
    except OverflowError:
        threshold = math.inf
    return CorrelationReport(
        shifts=shifts,
        n=n,
        average=average,
        bad_primes=report.primes,
        bad_prime_sum=bad_sum,
        degenerate_pairs=report.degenerate_pairs,
        predicted_main=1.0,
        bad_correction_scale=math.exp(bad_sum),
        size_threshold=threshold,
        size_condition_met=n >= threshold,
        edge_fraction=max(abs(r) for r in shifts) / n,
        runtime_seconds=time.perf_counter() - start,
        context=ctx,
    )


# ─── polynomial shift grids ───────────────────────────────────────────────


@dataclass(frozen=True)
class PolyFormsReport:
    """Average of the shifted product over a polynomial grid of shifts.

    grid_averages holds E_x prod_j nu(x + Q_j(l)) per grid point l in
    lexicographic order over [1, h]^d, and average is their mean, so the
    d = 1 case is exactly the mean of per-shift correlation averages.
    mean_pairwise_bad_sum averages, over l, the sum over unordered form
    pairs of sum(1/p) at primes coprime to W dividing that pair's constant
    difference; grid points where some pair degenerates to difference 0
    are counted in degenerate_l_count (their pair term is skipped, since
    every prime divides 0).
    """

    polys: tuple[IntPolynomial, ...]
    h: int
    n: int
    dims: int
    average: float
    grid_averages: tuple[float, ...]
    mean_pairwise_bad_sum: float
    degenerate_l_count: int
    runtime_seconds: float
    context: SieveContext


def polynomial_forms_average(
    ev: MajorantEvaluator,
    polys: Sequence[IntPolynomial],
    h: int,
    n: int,
    threads: int = 1,
) -> PolyFormsReport:
    """E over l in [1, h]^d and x in [1, n] of prod_j nu(x + Q_j(l)).

    Pairwise differences Q_i - Q_j must be nonconstant polynomials; a
    constant difference would pin two factors together at every grid
    point, which is exactly the degeneracy the average is designed to
    exclude.  h is taken directly rather than derived from n, since the
    log-power sizes the asymptotic regime wants are degenerate at any
    reachable n.
    """
    start = time.perf_counter()
    polys = tuple(polys)
    if not polys:
        raise PreconditionError("need at least one shift polynomial")
    dims = polys[0].nvars
    if any(q.nvars != dims for q in polys):
        raise PreconditionError("shift polynomials must share one variable set")
    for a, b in itertools.combinations(range(len(polys)), 2):
        if (polys[a] - polys[b]).degree() < 1:
            raise PreconditionError(
                f"difference of shift polynomials {a} and {b} is constant"
            )
    if h < 1:
        raise PreconditionError(f"grid size h must be >= 1, got {h}")
    if h**dims > POLY_GRID_CAP:
        raise CapacityError(f"grid [{h}]^{dims} exceeds {POLY_GRID_CAP} points")
    ctx = ev.ctx

    grid_averages: list[float] = []
    pair_sums: list[float] = []
    degenerate = 0
    diff_sum_cache: dict[int, float] = {}
    table: PrimeTable | None = None
    for point in itertools.product(range(1, h + 1), repeat=dims):
        shifts = tuple(int(q.evaluate(point)) for q in polys)
        grid_averages.append(_product_average(ev, shifts, n, threads))
        consts = LinearFormSystem.from_context(ctx, shifts).constants()
        total = 0.0
        saw_zero = False
        for ca, cb in itertools.combinations(consts, 2):
            d = abs(ca - cb)
            if d == 0:
                saw_zero = True
                continue
            if d not in diff_sum_cache:
                if table is None or table.limit < isqrt(d) + 1:
                    table = sieve(max(16, isqrt(d) + 1))
                diff_sum_cache[d] = sum(
                    1.0 / p
                    for p, _ in table.factorize(d)
                    if ctx.W % p != 0
                )
            total += diff_sum_cache[d]
        pair_sums.append(total)
        if saw_zero:
            degenerate += 1
    return PolyFormsReport(
        polys=polys,
        h=h,
        n=n,
        dims=dims,
        average=math.fsum(grid_averages) / len(grid_averages),
        grid_averages=tuple(grid_averages),
        mean_pairwise_bad_sum=math.fsum(pair_sums) / len(pair_sums),
        degenerate_l_count=degenerate,
        runtime_seconds=time.perf_counter() - start,
        context=ctx,
    )


@dataclass(frozen=True)
class TidySumReport:
    """Grid average of the weighted prime-divisor sum of one difference.

    For each l in [1, h]^d with delta(l) != 0 the inner sum runs over
    primes p <= prime_limit dividing delta(l), excluding the primes that
    divide every coefficient (those divide delta(l) for all l at once and
    are reported separately as vanishing_primes).  Weights are
    log(p)^log_exponent / p.
    """

    h: int
    dims: int
    prime_limit: int
    log_exponent: int
    average: float
    vanishing_primes: tuple[int, ...]
    vanishing_prime_sum: float
    zero_value_count: int


def tidy_sum(
    delta: IntPolynomial,
    h: int,
    prime_limit: int,
    log_exponent: int = 1,
    table: PrimeTable | None = None,
) -> TidySumReport:
    """Average over l in [1, h]^d of sum over p | delta(l) of log^c p / p.

    This is the quantity that controls how often a polynomial pair shares
    a large prime obstruction as the grid grows; it should shrink with h
    for any fixed prime window, and the tests measure exactly that.
    """
    if delta.is_zero:
        raise PreconditionError("difference polynomial is identically zero")
    if h < 1 or prime_limit < 2:
        raise PreconditionError(
            f"need h >= 1 and prime_limit >= 2, got {h}, {prime_limit}"
        )
    dims = delta.nvars
    if h**dims > POLY_GRID_CAP:
        raise CapacityError(f"grid [{h}]^{dims} exceeds {POLY_GRID_CAP} points")
    content = delta.content()
    vanishing = tuple(_small_prime_factors(content))
    values = [
        delta.evaluate(point)
        for point in itertools.product(range(1, h + 1), repeat=dims)
    ]
    largest = max((abs(v) for v in values), default=0)
    if table is None or table.limit < max(prime_limit, isqrt(largest) + 1):
        table = sieve(max(16, prime_limit, isqrt(largest) + 1))
    cache: dict[int, float] = {}
    contributions: list[float] = []
    zero_count = 0
    skip = set(vanishing)
    for v in values:
        if v == 0:
            zero_count += 1
            contributions.append(0.0)
            continue
        v = abs(v)
        if v not in cache:
            cache[v] = sum(
                math.log(p) ** log_exponent / p
                for p, _ in table.factorize(v)
                if p <= prime_limit and p not in skip
            )
        contributions.append(cache[v])
    return TidySumReport(
        h=h,
        dims=dims,
        prime_limit=prime_limit,
        log_exponent=log_exponent,
        average=math.fsum(contributions) / len(contributions),
        vanishing_primes=vanishing,
        vanishing_prime_sum=float(sum(1.0 / p for p in vanishing)),
        zero_value_count=zero_count,
    )


def _small_prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


# ─── Euler factors ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ZMatrix:
    """Complex exponents z = (1 + i xi) / log_R, one pair per form.

    Stored as the real frequency grids xi and xi_prime of shape (k, J) so
    the invariant that every real part equals 1 / log_R holds by
    construction.  Flattening follows LinearFormSystem: index u = i*J + j.
    """

    log_R: float
    xi: tuple[tuple[float, ...], ...]
    xi_prime: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if not (math.isfinite(self.log_R) and self.log_R > 0):
            raise PreconditionError(f"log_R must be positive, got {self.log_R}")
        for grid in (self.xi, self.xi_prime):
            if not grid or any(len(row) != len(grid[0]) for row in grid):
                raise PreconditionError("xi grids must be rectangular")
            if any(not math.isfinite(v) for row in grid for v in row):
                raise PreconditionError("xi grids must be finite")
        if (len(self.xi), len(self.xi[0])) != (
            len(self.xi_prime),
            len(self.xi_prime[0]),
        ):
            raise PreconditionError("xi and xi_prime shapes differ")

    @classmethod
    def of(
        cls,
        log_R: float,
        xi: Sequence[Sequence[float]],
        xi_prime: Sequence[Sequence[float]],
    ) -> "ZMatrix":
        freeze = lambda g: tuple(tuple(float(v) for v in row) for row in g)
        return cls(float(log_R), freeze(xi), freeze(xi_prime))

    @classmethod
    def zero(cls, log_R: float, k: int, j_count: int) -> "ZMatrix":
        if k < 1 or j_count < 1:
            raise PreconditionError("ZMatrix needs k >= 1 and J >= 1")
        row = (0.0,) * j_count
        grid = (row,) * k
        return cls(float(log_R), grid, grid)

    @property
    def k(self) -> int:
        return len(self.xi)

    @property
    def j_count(self) -> int:
        return len(self.xi[0])

    @property
    def size(self) -> int:
        return self.k * self.j_count

    def z(self, u: int) -> complex:
        i, j = divmod(u, self.j_count)
        return (1.0 + 1j * self.xi[i][j]) / self.log_R

    def z_prime(self, u: int) -> complex:
        i, j = divmod(u, self.j_count)
        return (1.0 + 1j * self.xi_prime[i][j]) / self.log_R


def euler_factor_ep(sys: LinearFormSystem, p: int, z: ZMatrix) -> complex:
    """The exact per-prime factor of the correlation's divisor-sum model.

    Semantically this sums mu(m) mu(m') m^{-z} m'^{-z'} c_p(active forms)
    over all choices m_u, m'_u in {1, p}; the code groups the 4^{kJ}
    choices by the active set T = {u : p | [m_u, m'_u]}, whose weight
    factorizes as prod_{u in T} (-p^{-z_u} - p^{-z'_u} + p^{-z_u - z'_u}).
    c_p is evaluated once per subset, exactly, via the linear fast path.

    For p dividing W with b chosen coprime to the offsets, every nonempty
    subset has c_p = 0 and the factor collapses to exactly 1.
    """
    if not is_probable_prime(p):
        raise PreconditionError(f"p must be prime, got {p}")
    if (z.k, z.j_count) != (sys.k, sys.j_count):
        raise PreconditionError(
            f"exponent shape {(z.k, z.j_count)} does not match "
            f"system shape {(sys.k, sys.j_count)}"
        )
    size = sys.size
    if size > EULER_SIZE_CAP:
        raise CapacityError(f"kJ = {size} exceeds the cap {EULER_SIZE_CAP}")
    weights = []
    for u in range(size):
        a = p ** (-z.z(u))
        b = p ** (-z.z_prime(u))
        weights.append(-a - b + a * b)
    total = 0j
    for mask in range(1 << size):
        active = [u for u in range(size) if mask >> u & 1]
        c = linear_local_factor(sys, p, active)
        if c == 0:
            continue
        term = complex(float(c))
        for u in active:
            term *= weights[u]
        total += term
    return total


def euler_factor_ep_prime(p: int, z: ZMatrix) -> complex:
    """Product over forms of (1-p^{-1-z})(1-p^{-1-z'})/(1-p^{-1-z-z'}).

    This is the zeta-shaped stand-in the exact factor is measured against;
    the denominators cannot vanish because every exponent has real part
    1 + 1/log_R > 1.
    """
    if not is_probable_prime(p):
        raise PreconditionError(f"p must be prime, got {p}")
    total = complex(1.0)
    for u in range(z.size):
        zu, zpu = z.z(u), z.z_prime(u)
        total *= (
            (1 - p ** (-1 - zu))
            * (1 - p ** (-1 - zpu))
            / (1 - p ** (-1 - zu - zpu))
        )
    return total


@dataclass(frozen=True)
class EulerCheckpoint:
    prime_limit: int
    partial_product: complex
    ratio_to_target: complex
    bad_prime_sum: float


@dataclass(frozen=True)
class EulerProductReport:
    """Partial products of E_p / E_p' on a fixed checkpoint ladder.

    target is (W/phi(W))^{kJ}; ratio_to_target divides each partial
    product by it.  differences are the absolute gaps between successive
    checkpoint products, the material for an empirical Cauchy check.
    small_prime_factors_one records whether every scanned p | W had exact
    factor 1.
    """

    target: float
    checkpoints: tuple[EulerCheckpoint, ...]
    differences: tuple[float, ...]
    small_prime_factors_one: bool
    bad_primes: tuple[int, ...]

    @property
    def cauchy_ok(self) -> bool:
        """Successive checkpoint gaps never grow."""
        return all(
            a >= b for a, b in zip(self.differences, self.differences[1:])
        )

    @property
    def final_ratio(self) -> complex:
        return self.checkpoints[-1].ratio_to_target


def euler_product_experiment(
    sys: LinearFormSystem,
    z: ZMatrix,
    prime_limit: int,
    table: PrimeTable | None = None,
) -> EulerProductReport:
    """Track prod_{p <= P} E_p / E_p' against (W/phi(W))^{kJ}.

    P runs over the fixed schedule 10^2..10^5 clipped to prime_limit, with
    prime_limit itself appended when it extends past the schedule.  The
    report carries measurements only; boundedness and shrinking gaps are
    asserted by the callers that know what tolerance their configuration
    earned.
    """
    if prime_limit < 2:
        raise PreconditionError(f"prime_limit must be >= 2, got {prime_limit}")
    marks = [c for c in CHECKPOINT_SCHEDULE if c <= prime_limit]
    if not marks or marks[-1] < prime_limit:
        marks.append(prime_limit)
    if table is None or table.limit < prime_limit:
        table = sieve(max(16, prime_limit))
    kj = sys.size
    target = float((sys.W / euler_phi_int(sys.W)) ** kj)
    bad = bad_primes_linear(sys, prime_limit, table)

    product = complex(1.0)
    small_ok = True
    rows: list[EulerCheckpoint] = []
    primes = [int(p) for p in table.primes_upto(prime_limit)]
    idx = 0
    for mark in marks:
        while idx < len(primes) and primes[idx] <= mark:
            p = primes[idx]
            ep = euler_factor_ep(sys, p, z)
            if sys.W % p == 0 and ep != 1:
                small_ok = False
            product *= ep / euler_factor_ep_prime(p, z)
            idx += 1
        rows.append(
            EulerCheckpoint(
                prime_limit=mark,
                partial_product=product,
                ratio_to_target=product / target,
                bad_prime_sum=float(
                    sum(1.0 / q for q in bad.primes if q <= mark)
                ),
            )
        )
    diffs = tuple(
        abs(b.partial_product - a.partial_product)
        for a, b in zip(rows, rows[1:])
    )
    return EulerProductReport(
        target=target,
        checkpoints=tuple(rows),
        differences=diffs,
        small_prime_factors_one=small_ok,
        bad_primes=bad.primes,
    )
