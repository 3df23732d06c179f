"""Divisor-sum majorant of the scaled indicator f_A.

nu(x) = (phi(W) log R / W)^k * prod_i (sum_{d | W x + b + h_i} mu(d)
chi(log d / log R))^2.  Only squarefree d < R contribute, so each factor
is a finite signed sum over subsets of the primes below R dividing the
shifted value.  Two evaluation routes are kept deliberately separate:

* value_at trial-divides each shifted value by the sieved primes;
* values_range never touches the integers themselves: for each prime it
  marks the arithmetic progression of x it divides, then combines the
  per-x prime subsets.

Both routes feed the same canonical subset enumeration, so they must
agree to the last bit; tests hold them to 1e-12 relative.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arith import _base_primes
from .cutoff import CutoffFunction, normalize_cutoff
from .errors import CapacityError, PreconditionError
from .wtrick import IndicatorTable, SieveContext

# fixed chunk for bulk work: means are summed chunk by chunk in index
# order, so results do not depend on the thread count
CHUNK = 1 << 16


@dataclass(frozen=True)
class MajorantEvaluator:
    """Precomputed data for evaluating nu anywhere on x >= 0."""

    ctx: SieveContext
    chi: CutoffFunction
    primes: tuple[int, ...]  # primes strictly below R, ascending

    @property
    def scale(self) -> float:
        return self.ctx.majorant_scale

    @property
    def chi0(self) -> float:
        return self.chi.value(0.0)

    # ── canonical inner sum (shared by both routes) ───────────────────

    def divisor_sum(self, ps: Sequence[int]) -> float:
        """sum_{squarefree d < R with prime support in ps} mu(d) chi(log d/log R).

        Depth-first in index order over the ascending prime list; the
        float addition order is therefore a pure function of ps, which is
        what makes the two evaluation routes bit-comparable.
        """
        R = self.ctx.R
        log_R = self.ctx.log_R
        chi = self.chi
        total = chi.value(0.0)  # d = 1

        def descend(start: int, d: int, mu: int) -> None:
            nonlocal total
            for j in range(start, len(ps)):
                d2 = d * ps[j]
                if d2 >= R:
                    break  # ps ascends, so later branches are larger still
                total += -mu * chi.value(math.log(d2) / log_R)
                descend(j + 1, d2, -mu)

        descend(0, 1, 1)
        return total

    # ── route 1: pointwise via trial division ─────────────────────────

    def value_at(self, x: int) -> float:
        """nu(x) for a single x >= 0 (defined on all of the naturals)."""
        if x < 0:
            raise PreconditionError(f"nu is defined for x >= 0, got {x}")
        ctx = self.ctx
        prod = 1.0
        for h in ctx.offsets.h:
            n = ctx.W * x + ctx.b + h
            ps = tuple(p for p in self.primes if n % p == 0)
            s = self.divisor_sum(ps)
            prod *= s * s
        return self.scale * prod

    # ── route 2: bulk via congruence marking ──────────────────────────

    def values_range(self, lo: int, hi: int) -> np.ndarray:
        """nu on [lo, hi] inclusive without factoring any integer.

        For each sieved prime p and shift h the x with p | Wx + b + h form
        one progression mod p (or none, when p | W: b avoids every shift
        class mod such p).  Subset bitmasks are accumulated per x and the
        canonical divisor_sum is applied per distinct mask.
        """
        if lo < 0 or hi < lo:
            raise PreconditionError(f"bad range [{lo}, {hi}]")
        ctx = self.ctx
        size = hi - lo + 1
        out = np.full(size, self.scale)
        for h in ctx.offsets.h:
            mask = np.zeros(size, dtype=np.uint64)
            for bit, p in enumerate(self.primes):
                if ctx.W % p == 0:
                    continue
                a = (-(ctx.b + h) * pow(ctx.W, -1, p)) % p
                first = ((a - lo) % p)
                mask[first::p] |= np.uint64(1 << bit)
            uniq, inv = np.unique(mask, return_inverse=True)
            vals = np.fromiter(
                (self.divisor_sum(self._mask_primes(int(m))) for m in uniq),
                dtype=float,
                count=uniq.size,
            )
            inner = vals[inv]
            out *= inner * inner
        return out

    def _mask_primes(self, mask: int) -> tuple[int, ...]:
        return tuple(p for bit, p in enumerate(self.primes) if mask >> bit & 1)

    # ── aggregates ─────────────────────────────────────────────────────

    def mean(self, n: int, threads: int = 1) -> float:
        """E_{x in [1, n]} nu(x), chunked sum in fixed index order."""
        if n < 1:
            raise PreconditionError(f"mean needs n >= 1, got {n}")
        sums = [float(np.sum(c)) for c in self.chunked_values(1, n, threads)]
        return math.fsum(sums) / n

    def chunked_values(self, lo: int, hi: int, threads: int = 1) -> list[np.ndarray]:
        """values_range split into fixed CHUNK-sized pieces, index order.

        The chunk grid is anchored at lo and never depends on the thread
        count, so concatenating the pieces is bit-identical to a single
        values_range call chunk by chunk.
        """
        spans = [
            (a, min(a + CHUNK - 1, hi)) for a in range(lo, hi + 1, CHUNK)
        ]
        if threads <= 1 or len(spans) <= 1:
            return [self.values_range(a, b) for a, b in spans]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda s: self.values_range(*s), spans))


def build_evaluator(
    ctx: SieveContext, chi: CutoffFunction | None = None
) -> MajorantEvaluator:
    """Sieve the primes below R and bundle them with the cutoff."""
    if chi is None:
        chi = normalize_cutoff()
    ps = tuple(p for p in _base_primes(int(math.ceil(ctx.R))) if p < ctx.R)
    if len(ps) > 63:
        raise CapacityError(
            f"{len(ps)} primes below R = {ctx.R:.1f} exceed the 63-bit "
            f"subset-mask budget; lower eta0"
        )
    return MajorantEvaluator(ctx=ctx, chi=chi, primes=ps)


# ── majorization scan ─────────────────────────────────────────────────


@dataclass(frozen=True)
class MajorizationReport:
    checked: int
    support_value: float
    violations: int
    first_violation: tuple[int, float, float] | None  # (x, f(x), nu(x))
    ok: bool


def verify_majorization(
    f: IndicatorTable, ev: MajorantEvaluator
) -> MajorizationReport:
    """Scan supp(f) for f(x) > nu(x); off the support f = 0 <= nu trivially.

    nu >= 0 everywhere (each factor is a square), so only support points
    can violate 0 <= f <= nu.
    """
    pos = np.asarray(f.positions, dtype=np.int64)
    if pos.size == 0:
        return MajorizationReport(0, f.value, 0, None, True)
    lo, hi = int(pos.min()), int(pos.max())
    nu = ev.values_range(lo, hi)[pos - lo]
    bad = np.flatnonzero(f.value > nu)
    first = None
    if bad.size:
        i = int(bad[0])
        first = (int(pos[i]), float(f.value), float(nu[i]))
    return MajorizationReport(
        checked=int(pos.size),
        support_value=f.value,
        violations=int(bad.size),
        first_violation=first,
        ok=bad.size == 0,
    )
