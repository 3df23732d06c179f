"""The W-trick scaffolding around the special set A.

A = A(t, m, eps0, N') collects n <= N' such that every shifted value
n + h_i is free of prime factors <= n^eps0 and at least m+1 of the shifts
are prime.  Passing to the progression n = W*x + b with b chosen so that
no shift is ever divisible by a prime dividing W removes the small-prime
irregularities; f_A is the indicator of A on that progression, scaled so
its mean is comparable to 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .admissible import HTuple, wtrick_residues
from .arith import PrimeTable, euler_phi_int, primorial, sieve
from .errors import PreconditionError

# f_A lives on [ceil(sqrt N), N - ceil(sqrt N)]; require headroom so the
# window is a real interval and the edge corrections stay negligible.
_MIN_N = 16


@dataclass(frozen=True)
class MaynardParams:
    """Defining data of the set A: offsets, prime count, roughness, range."""

    offsets: HTuple
    m: int
    epsilon0: float
    nprime: int

    def __post_init__(self):
        if self.m < 0:
            raise PreconditionError(f"m must be >= 0, got {self.m}")
        if self.m + 1 > self.offsets.k:
            raise PreconditionError(
                f"m+1 = {self.m + 1} prime shifts requested from k = {self.offsets.k}"
            )
        if not (0.0 < self.epsilon0 < 1.0):
            raise PreconditionError(f"epsilon0 must lie in (0,1), got {self.epsilon0}")
        if self.nprime < _MIN_N:
            raise PreconditionError(f"nprime must be >= {_MIN_N}, got {self.nprime}")

    @property
    def k(self) -> int:
        return self.offsets.k


def build_maynard_set(params: MaynardParams, table: PrimeTable) -> np.ndarray:
    """All members of A in [1, nprime], ascending int64 array.

    The roughness condition P^-(prod(n+h_i)) > n^eps0 is evaluated as
    min_i lpf(n+h_i) > n^eps0; a shift equal to 1 contributes nothing to
    the product and is skipped (its lpf is treated as +inf).
    """
    np_ = params.nprime
    if table.limit < np_ + params.offsets.h[-1]:
        raise PreconditionError(
            f"prime table limit {table.limit} below nprime + max offset "
            f"{np_ + params.offsets.h[-1]}"
        )
    ns = np.arange(1, np_ + 1, dtype=np.int64)
    min_lpf = np.full(np_, np.inf)
    prime_hits = np.zeros(np_, dtype=np.int64)
    for h in params.offsets.h:
        vals = ns + h
        lpf = table.lpf[vals].astype(np.int64)
        prime_hits += lpf == vals
        lpf_f = np.where(vals == 1, np.inf, lpf.astype(float))
        min_lpf = np.minimum(min_lpf, lpf_f)
    rough = np.log(min_lpf) > params.epsilon0 * np.log(ns)
    keep = rough & (prime_hits >= params.m + 1)
    return ns[keep]


def subset_by_prime_pattern(
    members: np.ndarray, t: HTuple, indices: Sequence[int], table: PrimeTable
) -> np.ndarray:
    """Members n with n + h_i prime for every i in indices (0-based)."""
    idx = sorted(set(int(i) for i in indices))
    if not idx or idx[0] < 0 or idx[-1] >= t.k:
        raise PreconditionError(f"indices {indices} out of range for k={t.k}")
    members = np.asarray(members, dtype=np.int64)
    keep = np.ones(members.shape, dtype=bool)
    for i in idx:
        vals = members + t.h[i]
        if vals.size and int(vals.max()) > table.limit:
            raise PreconditionError("prime table too small for requested pattern")
        keep &= table.lpf[vals].astype(np.int64) == vals
    return members[keep]


@dataclass(frozen=True)
class SieveContext:
    """Derived quantities shared by the majorant and correlation layers.

    Invariants checked here: b is a usable residue (in X_W and coprime to
    W), eta0 < epsilon0/2 (so the majorization argument applies on the
    support), and eta0 <= 1/(4*k*jmax + 1) for the configured jmax.  The
    scaling constant c0 is recorded as given; the default choice keeps
    c0 < eta0^k/4^k, and majorization_margin exposes how much room is left
    (deliberately oversized c0 is a supported negative experiment).
    """

    params: MaynardParams
    w: int
    W: int
    b: int
    N: int
    eta0: float
    R: float
    c0: float
    jmax: int

    def __post_init__(self):
        if self.N < _MIN_N:
            raise PreconditionError(f"N = {self.N} too small (need >= {_MIN_N})")
        if not (0 < self.eta0 < self.params.epsilon0 / 2):
            raise PreconditionError(
                f"eta0 = {self.eta0} must lie in (0, epsilon0/2) = "
                f"(0, {self.params.epsilon0 / 2})"
            )
        bound = 1.0 / (4 * self.k * self.jmax + 1)
        if self.eta0 > bound + 1e-15:
            raise PreconditionError(
                f"eta0 = {self.eta0} exceeds 1/(4k*jmax+1) = {bound}"
            )
        if self.c0 <= 0:
            raise PreconditionError(f"c0 must be positive, got {self.c0}")
        if self.W < 2 or not 1 <= self.b < self.W:
            raise PreconditionError(f"b = {self.b} outside [1, W) for W = {self.W}")
        if math.gcd(self.b, self.W) != 1:
            raise PreconditionError(f"gcd(b, W) = {math.gcd(self.b, self.W)} != 1")
        if self.b not in wtrick_residues(self.params.offsets, self.W):
            raise PreconditionError(
                f"b = {self.b} has a shift divisible by a prime factor of W"
            )

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def offsets(self) -> HTuple:
        return self.params.offsets

    @property
    def phi_W(self) -> int:
        return euler_phi_int(self.W)

    @property
    def support_lo(self) -> int:
        return math.isqrt(self.N - 1) + 1  # ceil(sqrt(N))

    @property
    def support_hi(self) -> int:
        return self.N - self.support_lo

    @property
    def log_R(self) -> float:
        return self.eta0 * math.log(self.N)

    @property
    def majorant_scale(self) -> float:
        """(phi(W) * log R / W) ** k, the normalization of the majorant."""
        return (self.phi_W * self.log_R / self.W) ** self.k

    @property
    def indicator_scale(self) -> float:
        """c0 * (phi(W) * log N / W) ** k, the height of f_A."""
        return self.c0 * (self.phi_W * math.log(self.N) / self.W) ** self.k

    @property
    def majorization_margin(self) -> float:
        """eta0^k/4^k - c0; positive for the default c0."""
        return self.eta0**self.k / 4**self.k - self.c0

    def with_residue(self, b: int) -> "SieveContext":
        return replace(self, b=b)


def choose_parameters(
    nprime: int,
    t: HTuple,
    m: int,
    epsilon0: float,
    jmax: int = 1,
    *,
    w: int | None = None,
    eta0: float | None = None,
    c0: float | None = None,
    b: int | None = None,
) -> SieveContext:
    """Derive a SieveContext from the experiment knobs.

    Defaults: w = max(2, floor(log log log nprime)); eta0 = half of
    min(epsilon0/2, 1/(4*k*jmax+1)); c0 = half of eta0^k/4^k; b = the
    smallest usable residue mod W.  Every default can be overridden, and
    overrides are validated (except c0, which is an experiment knob; see
    SieveContext).

    Raises PreconditionError when the constraints cannot be met, e.g.
    R = N^eta0 < 2, or no usable residue class mod W exists.
    """
    params = MaynardParams(offsets=t, m=m, epsilon0=epsilon0, nprime=nprime)
    if jmax < 1:
        raise PreconditionError(f"jmax must be >= 1, got {jmax}")
    if w is None:
        lll = _safe_log3(nprime)
        w = max(2, math.floor(lll))
    elif w < 2:
        raise PreconditionError(f"w must be >= 2, got {w}")
    W = primorial(w)
    N = nprime // W
    if N < _MIN_N:
        raise PreconditionError(
            f"N = nprime // W = {N} too small; lower w or raise nprime"
        )
    k = t.k
    if eta0 is None:
        eta0 = min(epsilon0 / 2, 1.0 / (4 * k * jmax + 1)) / 2
    R = N**eta0
    if R < 2:
        raise PreconditionError(
            f"R = N^eta0 = {R:.3f} < 2: no integer d > 1 fits below R; "
            f"raise eta0 or nprime"
        )
    if c0 is None:
        c0 = (eta0**k / 4**k) / 2
    candidates = [r for r in wtrick_residues(t, W) if math.gcd(r, W) == 1]
    if not candidates:
        raise PreconditionError(f"no usable residue class mod W = {W}")
    if b is None:
        b = candidates[0]
    elif b not in candidates:
        raise PreconditionError(f"b = {b} is not a usable residue mod W = {W}")
    return SieveContext(
        params=params, w=w, W=W, b=b, N=N, eta0=eta0, R=R, c0=c0, jmax=jmax
    )


def _safe_log3(n: int) -> float:
    x = math.log(n)
    if x <= 1.0:
        return 0.0
    x = math.log(x)
    if x <= 0.0:
        return 0.0
    return math.log(x)


@dataclass(frozen=True)
class ResidueSelection:
    b: int
    count: int
    counts: dict[int, int]
    empty: bool
    floor_scale: float
    floor_note: str


def select_residue(members: np.ndarray, ctx: SieveContext) -> ResidueSelection:
    """Pick b maximizing |{x in the support window : W*x + b in A}|.

    Ties go to the smallest b.  The theoretical lower bound for the best
    class has the shape const * (W/phi(W))^k * N / log(N)^k with a
    non-effective constant, so it is reported as a note, never asserted.
    """
    members = np.asarray(members, dtype=np.int64)
    in_a = np.zeros(ctx.params.nprime + 1, dtype=bool)
    in_a[members[members <= ctx.params.nprime]] = True
    xs = np.arange(ctx.support_lo, ctx.support_hi + 1, dtype=np.int64)
    counts: dict[int, int] = {}
    candidates = [
        r for r in wtrick_residues(ctx.offsets, ctx.W) if math.gcd(r, ctx.W) == 1
    ]
    for cand in candidates:
        vals = ctx.W * xs + cand
        vals = vals[vals <= ctx.params.nprime]
        counts[cand] = int(np.count_nonzero(in_a[vals]))
    best = max(candidates, key=lambda r: (counts[r], -r))
    k = ctx.k
    floor_scale = (ctx.W / ctx.phi_W) ** k * ctx.N / math.log(ctx.N) ** k
    return ResidueSelection(
        b=best,
        count=counts[best],
        counts=counts,
        empty=counts[best] == 0,
        floor_scale=floor_scale,
        floor_note=(
            "best-class count >= delta*C1/(2*C2) * floor_scale for some "
            "non-effective delta, C1, C2 (informational only)"
        ),
    )


@dataclass(frozen=True)
class IndicatorTable:
    """Sparse table of f_A: support positions and the common height."""

    n: int
    positions: np.ndarray
    value: float

    @property
    def count(self) -> int:
        return int(self.positions.size)

    def mean(self) -> float:
        return self.value * self.count / self.n

    def dense(self) -> np.ndarray:
        """f as a dense array indexed 1..n (slot 0 stays 0)."""
        out = np.zeros(self.n + 1)
        out[self.positions] = self.value
        return out

    def support_set(self) -> set[int]:
        return set(int(x) for x in self.positions)


def build_scaled_indicator(members: np.ndarray, ctx: SieveContext) -> IndicatorTable:
    """f_A(x) = indicator_scale on {x in [sqrt(N), N - sqrt(N)] : Wx+b in A}."""
    members = np.asarray(members, dtype=np.int64)
    in_a = np.zeros(ctx.params.nprime + 1, dtype=bool)
    in_a[members[members <= ctx.params.nprime]] = True
    xs = np.arange(ctx.support_lo, ctx.support_hi + 1, dtype=np.int64)
    vals = ctx.W * xs + ctx.b
    ok = vals <= ctx.params.nprime
    xs, vals = xs[ok], vals[ok]
    support = xs[in_a[vals]]
    return IndicatorTable(n=ctx.N, positions=support, value=ctx.indicator_scale)


# ── set files ─────────────────────────────────────────────────────────


def save_set(path, members: np.ndarray, params: MaynardParams) -> None:
    """JSON header line with the defining parameters, then one n per line."""
    header = {
        "offsets": list(params.offsets.h),
        "m": params.m,
        "epsilon0": params.epsilon0,
        "nprime": params.nprime,
        "size": int(np.asarray(members).size),
    }
    with open(path, "w", encoding="ascii") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for n in np.asarray(members, dtype=np.int64):
            fh.write(f"{int(n)}\n")


def load_set(path, table: PrimeTable | None = None) -> tuple[np.ndarray, MaynardParams]:
    """Load an exported set and re-verify every member against its header.

    A table covering nprime + max offset is built when none is supplied.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = json.loads(fh.readline())
        body = [int(line) for line in fh if line.strip()]
    params = MaynardParams(
        offsets=HTuple.of(header["offsets"]),
        m=int(header["m"]),
        epsilon0=float(header["epsilon0"]),
        nprime=int(header["nprime"]),
    )
    members = np.asarray(body, dtype=np.int64)
    if members.size != header["size"]:
        raise PreconditionError(
            f"set file {path} lists {members.size} members, header says "
            f"{header['size']}"
        )
    if members.size and np.any(np.diff(members) <= 0):
        raise PreconditionError(f"set file {path} is not strictly increasing")
    if table is None:
        table = sieve(params.nprime + params.offsets.h[-1])
    expected = build_maynard_set(params, table)
    if not np.array_equal(members, expected):
        raise PreconditionError(
            f"set file {path} disagrees with recomputed membership"
        )
    return members, params
