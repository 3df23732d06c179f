"""Local root densities mod p and the good/bad/terrible prime split.

The central object is the density c_p of simultaneous roots of a polynomial
system over F_p^D, computed exactly as a Fraction by grid enumeration.  On
top of that sit the classifier for shifted linear forms W(x+r)+b+h, the
bad-prime scan driven by pairwise constant differences, and the CRT density
alpha for lists of divisibility constraints.  Everything here is exact
rational arithmetic except the final float in bad_prime_sum; the point of
the module is to distinguish a 1/p from a 1/p^2 without numerical noise.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd, isqrt
from typing import Iterable, Sequence

import numpy as np

from .arith import PrimeTable, is_probable_prime, sieve
from .errors import CapacityError, PreconditionError, UnsupportedCaseError
from .polynomials import IntPolynomial, mod_p_gcd

GRID_CAP = 10**7
ALPHA_LCM_CAP = 10**9


# ─── linear form systems ──────────────────────────────────────────────────


@dataclass(frozen=True)
class LinearFormSystem:
    """The kJ univariate forms W*(x + r_j) + b + h_i.

    Forms are flattened in row-major order over (i, j): form u = i*J + j
    carries offset h_i and shift r_j.  Only W >= 1 and nonempty index sets
    are enforced; b may be any integer so that deliberately degenerate
    systems stay constructible for negative tests.
    """

    W: int
    b: int
    shifts: tuple[int, ...]
    offsets: tuple[int, ...]

    def __init__(
        self,
        W: int,
        b: int,
        shifts: Iterable[int],
        offsets: Iterable[int],
    ):
        shifts = tuple(int(r) for r in shifts)
        offsets = tuple(int(h) for h in offsets)
        if W < 1:
            raise PreconditionError(f"W must be >= 1, got {W}")
        if not shifts or not offsets:
            raise PreconditionError("need at least one shift and one offset")
        object.__setattr__(self, "W", int(W))
        object.__setattr__(self, "b", int(b))
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_context(cls, ctx, shifts: Iterable[int]) -> "LinearFormSystem":
        """Forms for a sieve context's W, b, and offsets at the given shifts."""
        return cls(ctx.W, ctx.b, shifts, ctx.offsets.h)

    @property
    def k(self) -> int:
        return len(self.offsets)

    @property
    def j_count(self) -> int:
        return len(self.shifts)

    @property
    def size(self) -> int:
        return self.k * self.j_count

    def form_index(self, i: int, j: int) -> int:
        if not (0 <= i < self.k and 0 <= j < self.j_count):
            raise PreconditionError(f"form index ({i}, {j}) out of range")
        return i * self.j_count + j

    def constant(self, u: int) -> int:
        """Constant term of form u, so form u is W*x + constant(u)."""
        i, j = divmod(u, self.j_count)
        if not 0 <= i < self.k:
            raise PreconditionError(f"form index {u} out of range")
        return self.W * self.shifts[j] + self.b + self.offsets[i]

    def constants(self) -> tuple[int, ...]:
        return tuple(
            self.W * r + self.b + h for h in self.offsets for r in self.shifts
        )

    def forms(self) -> list[IntPolynomial]:
        return [
            IntPolynomial.univariate([c, self.W]) for c in self.constants()
        ]


# ─── exact local densities ────────────────────────────────────────────────


def local_factor(polys: Sequence[IntPolynomial], p: int) -> Fraction:
    """Density of common roots of the system over F_p^D, exact.

    The empty system has density 1 by convention.  Enumeration is over the
    full grid, so p^D is capped at GRID_CAP; the grid route is deliberately
    definition-shaped and serves as the reference that faster special-case
    paths are tested against.
    """
    if not is_probable_prime(p):
        raise PreconditionError(f"p must be prime, got {p}")
    polys = list(polys)
    if not polys:
        return Fraction(1)
    d = polys[0].nvars
    if any(q.nvars != d for q in polys):
        raise PreconditionError("mixed variable counts in one system")
    if p**d > GRID_CAP:
        raise CapacityError(f"grid p^D = {p}^{d} exceeds {GRID_CAP}")
    hits = np.ones((p,) * d, dtype=bool)
    for q in polys:
        hits &= q.reduce_mod(p).eval_grid() == 0
        if not hits.any():
            return Fraction(0)
    return Fraction(int(hits.sum()), p**d)


def linear_local_factor(
    sys: LinearFormSystem, p: int, active: Iterable[int]
) -> Fraction:
    """c_p of the active subset of a linear system, by root comparison.

    For p not dividing W each form W*x + c has the single root -c/W, so the
    density is 1/p when all active roots coincide and 0 otherwise.  For
    p | W the forms are constants: density 1 if they all vanish, else 0.
    Empty subsets give 1.  Agrees with local_factor on the same subset but
    costs O(|active|) instead of O(p).
    """
    active = sorted(set(active))
    if not active:
        return Fraction(1)
    if any(not 0 <= u < sys.size for u in active):
        raise PreconditionError("active form index out of range")
    if sys.W % p == 0:
        if all(sys.constant(u) % p == 0 for u in active):
            return Fraction(1)
        return Fraction(0)
    w_inv = pow(sys.W % p, -1, p)
    roots = {(-sys.constant(u) * w_inv) % p for u in active}
    return Fraction(1, p) if len(roots) == 1 else Fraction(0)


# ─── prime classification ─────────────────────────────────────────────────


class PrimeClass(enum.Enum):
    GOOD = "good"
    BAD = "bad"
    TERRIBLE = "terrible"
    DEGENERATE_SMALL_PRIME = "degenerate-small-prime"


@dataclass(frozen=True)
class PrimeClassification:
    """Outcome of classifying one prime against a system of forms.

    Exactly one witness field is set for the non-good outcomes: the index
    of a form vanishing mod p (terrible), the index of a form that is not
    degree-1 mod p, or the lexicographically first non-coprime pair.
    """

    p: int
    kind: PrimeClass
    vanishing_index: int | None = None
    nonlinear_index: int | None = None
    noncoprime_pair: tuple[int, int] | None = None
    note: str = ""

    @property
    def is_good(self) -> bool:
        return self.kind is PrimeClass.GOOD

    @property
    def is_bad(self) -> bool:
        """Bad in the inclusive sense: terrible primes count as bad."""
        return self.kind in (PrimeClass.BAD, PrimeClass.TERRIBLE)


def classify_prime(
    target: LinearFormSystem | Sequence[IntPolynomial], p: int
) -> PrimeClassification:
    """Classify p as good, bad, or terrible for a univariate system.

    A prime is terrible when some form vanishes identically mod p, good
    when every form has degree exactly 1 mod p and the forms are pairwise
    coprime mod p, and bad otherwise.  For a LinearFormSystem with p | W
    every form collapses to a constant; that regime is reported as the
    separate degenerate-small-prime outcome instead of being forced into
    the good/bad split, since the interesting range of p starts above the
    primes dividing W.

    Multivariate systems are out of scope and raise UnsupportedCaseError.
    """
    if not is_probable_prime(p):
        raise PreconditionError(f"p must be prime, got {p}")
    if isinstance(target, LinearFormSystem):
        if target.W % p == 0:
            consts = target.constants()
            zero = [u for u, c in enumerate(consts) if c % p == 0]
            note = (
                f"all {target.size} forms constant mod {p}; "
                f"{len(zero)} of them vanish"
            )
            return PrimeClassification(
                p=p,
                kind=PrimeClass.DEGENERATE_SMALL_PRIME,
                vanishing_index=zero[0] if zero else None,
                note=note,
            )
        polys = target.forms()
    else:
        polys = list(target)
    if not polys:
        raise PreconditionError("cannot classify an empty system")
    if any(q.nvars != 1 for q in polys):
        raise UnsupportedCaseError(
            "classification is implemented for one variable"
        )

    reduced = [q.reduce_mod(p) for q in polys]
    for u, q in enumerate(reduced):
        if q.is_zero:
            return PrimeClassification(
                p=p,
                kind=PrimeClass.TERRIBLE,
                vanishing_index=u,
                note=f"form {u} vanishes identically mod {p}",
            )
    for u, q in enumerate(reduced):
        if q.degree() != 1:
            return PrimeClassification(
                p=p,
                kind=PrimeClass.BAD,
                nonlinear_index=u,
                note=f"form {u} has degree {q.degree()} mod {p}, not 1",
            )
    for u, v in itertools.combinations(range(len(reduced)), 2):
        if mod_p_gcd(reduced[u], reduced[v]).degree() > 0:
            return PrimeClassification(
                p=p,
                kind=PrimeClass.BAD,
                noncoprime_pair=(u, v),
                note=f"forms {u} and {v} share a factor mod {p}",
            )
    return PrimeClassification(p=p, kind=PrimeClass.GOOD)


# ─── bad primes of a linear system ────────────────────────────────────────


@dataclass(frozen=True)
class BadPrimeReport:
    """Sorted bad primes plus any identically-equal form pairs.

    A pair of forms with equal constants is bad at every prime at once;
    such pairs are listed in degenerate_pairs rather than poisoning the
    prime list.  The report iterates as its prime list.
    """

    primes: tuple[int, ...]
    degenerate_pairs: tuple[tuple[int, int], ...]
    limit: int

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, p) -> bool:
        return p in self.primes

    def __len__(self) -> int:
        return len(self.primes)


def bad_primes_linear(
    sys: LinearFormSystem, limit: int, table: PrimeTable | None = None
) -> BadPrimeReport:
    """All primes p <= limit, p not dividing W, bad for the system.

    A prime p coprime to W is bad exactly when it divides some nonzero
    difference of the form constants W*r_j + b + h_i, because each form is
    then honestly linear mod p and two forms fail coprimality mod p iff
    their single roots coincide.  So the scan factors the pairwise
    differences instead of classifying every prime.
    """
    if limit < 2:
        raise PreconditionError(f"limit must be >= 2, got {limit}")
    consts = sys.constants()
    diffs: set[int] = set()
    degenerate: list[tuple[int, int]] = []
    for u, v in itertools.combinations(range(len(consts)), 2):
        d = abs(consts[u] - consts[v])
        if d == 0:
            degenerate.append((u, v))
        else:
            diffs.add(d)
    if table is None and diffs:
        table = sieve(max(16, limit, isqrt(max(diffs)) + 1))
    bad: set[int] = set()
    for d in diffs:
        for p, _ in table.factorize(d):
            if p <= limit and sys.W % p != 0:
                bad.add(p)
    return BadPrimeReport(
        primes=tuple(sorted(bad)),
        degenerate_pairs=tuple(degenerate),
        limit=limit,
    )


def bad_prime_sum(
    sys: LinearFormSystem,
    limit: int,
    table: PrimeTable | None = None,
    exact: bool = False,
) -> float | Fraction:
    """Sum of 1/p over the bad primes up to limit.

    This is the quantity that controls the error term of the correlation
    experiments; exact=True returns it as a Fraction.
    """
    report = bad_primes_linear(sys, limit, table)
    if exact:
        return sum((Fraction(1, p) for p in report.primes), Fraction(0))
    return float(sum(1.0 / p for p in report.primes))


# ─── CRT density of divisibility constraints ──────────────────────────────


def alpha_density(
    constraints: Sequence[tuple[int, IntPolynomial]],
    lcm_cap: int = ALPHA_LCM_CAP,
) -> Fraction:
    """Density of y in Z_M satisfying m | f(y) for every (m, f) given.

    M is the lcm of the moduli.  Each f must be a univariate form of degree
    at most 1; the density is assembled prime by prime (solve each
    constraint at p^e, merge the resulting residue classes) and multiplied.
    The multiplicativity is CRT, and the brute-force enumeration oracle for
    it lives in the tests rather than being assumed here silently.
    """
    lcm = 1
    parsed: list[tuple[int, int, int]] = []
    for m, f in constraints:
        m = int(m)
        if m < 1:
            raise PreconditionError(f"modulus must be >= 1, got {m}")
        if f.nvars != 1 or f.degree() > 1:
            raise PreconditionError(
                f"alpha_density needs univariate linear forms, got {f}"
            )
        a = f.terms().get((1,), 0)
        c = f.constant_term()
        if m > 1:
            parsed.append((m, a, c))
            lcm = lcm * m // gcd(lcm, m)
            if lcm > lcm_cap:
                raise CapacityError(f"constraint lcm exceeds {lcm_cap}")
    density = Fraction(1)
    for p in _prime_factors(lcm):
        density *= _alpha_at_prime(p, parsed)
        if density == 0:
            break
    return density


def _alpha_at_prime(p: int, parsed: list[tuple[int, int, int]]) -> Fraction:
    """Density of the merged residue condition at one prime."""
    mod_exp = 0  # current class is (residue mod p^mod_exp)
    residue = 0
    for m, a, c in parsed:
        e = _val_p(m, p)
        if e == 0:
            continue
        va = _val_p(a, p) if a else e  # a == 0 acts like valuation >= e
        if va >= e:
            # No dependence on y at this precision: feasible iff p^e | c.
            if c % p**e != 0:
                return Fraction(0)
            continue
        if c % p**va != 0:
            return Fraction(0)
        s = e - va
        aa = (a // p**va) % p**s
        cc = (c // p**va) % p**s
        r = (-cc * pow(aa, -1, p**s)) % p**s
        # Merge y ≡ r (mod p^s) into the running class.
        lo = min(mod_exp, s)
        if (residue - r) % p**lo != 0:
            return Fraction(0)
        if s > mod_exp:
            mod_exp, residue = s, r
    return Fraction(1, p**mod_exp)


def _val_p(n: int, p: int) -> int:
    if n == 0:
        raise PreconditionError("valuation of 0 requested")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _prime_factors(n: int) -> list[int]:
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


# ─── empirical survey of the local estimates ──────────────────────────────


@dataclass(frozen=True)
class LocalEstimateReport:
    """Empirical constants behind the local density bounds.

    Over the surveyed primes: empty subsets must give exactly 1
    (empty_exact); max_single_scaled is max p*c_p over singletons at
    non-terrible primes; max_good_singleton_dev is max p^2*|c_p - 1/p| over
    singletons at good primes; max_good_multi_scaled is max p^2*c_p over
    larger subsets at good primes.  The survey asserts finiteness, not any
    particular constant.
    """

    prime_limit: int
    checked_primes: int
    subsets_checked: int
    class_counts: dict[str, int] = field(default_factory=dict)
    empty_exact: bool = True
    max_single_scaled: Fraction = Fraction(0)
    max_good_singleton_dev: Fraction = Fraction(0)
    max_good_multi_scaled: Fraction = Fraction(0)

    @property
    def ok(self) -> bool:
        return self.empty_exact and self.checked_primes > 0


def verify_local_estimates(
    sys: LinearFormSystem,
    prime_limit: int,
    max_subset: int = 3,
    sample_count: int = 100,
    seed: int = 0,
    table: PrimeTable | None = None,
) -> LocalEstimateReport:
    """Survey c_p over subsets of the system's forms for p <= prime_limit.

    Densities go through the generic grid path on the exact subset of
    forms, so this doubles as a cross-check of linear_local_factor (the
    tests compare the two).  Subsets of size up to max_subset are fully
    enumerated when the system has at most 10 forms; beyond that, all
    singletons are kept and sample_count larger subsets are drawn with a
    seeded generator so reruns see the same subsets.
    """
    if table is None:
        table = sieve(max(16, prime_limit))
    subsets = _survey_subsets(sys.size, max_subset, sample_count, seed)
    counts: dict[str, int] = {}
    empty_exact = True
    max_single = Fraction(0)
    max_single_dev = Fraction(0)
    max_multi = Fraction(0)
    checked = 0
    forms = sys.forms()
    for p in table.primes_upto(prime_limit):
        p = int(p)
        cls = classify_prime(sys, p)
        counts[cls.kind.value] = counts.get(cls.kind.value, 0) + 1
        checked += 1
        if local_factor([], p) != 1:
            empty_exact = False
        if cls.kind is PrimeClass.DEGENERATE_SMALL_PRIME:
            continue
        for subset in subsets:
            c = local_factor([forms[u] for u in subset], p)
            if cls.kind is not PrimeClass.TERRIBLE and len(subset) == 1:
                max_single = max(max_single, p * c)
            if cls.is_good:
                if len(subset) == 1:
                    dev = abs(c - Fraction(1, p)) * p * p
                    max_single_dev = max(max_single_dev, dev)
                else:
                    max_multi = max(max_multi, p * p * c)
    return LocalEstimateReport(
        prime_limit=prime_limit,
        checked_primes=checked,
        subsets_checked=len(subsets),
        class_counts=counts,
        empty_exact=empty_exact,
        max_single_scaled=max_single,
        max_good_singleton_dev=max_single_dev,
        max_good_multi_scaled=max_multi,
    )


def _survey_subsets(
    size: int, max_subset: int, sample_count: int, seed: int
) -> list[tuple[int, ...]]:
    """Singletons always; pairs and triples in full for small systems."""
    singles = [(u,) for u in range(size)]
    if size <= 10:
        larger = [
            s
            for r in range(2, max_subset + 1)
            for s in itertools.combinations(range(size), r)
        ]
        return singles + larger
    rng = random.Random(seed)
    available = sum(comb(size, r) for r in range(2, max_subset + 1))
    sample_count = min(sample_count, available)
    larger_set: set[tuple[int, ...]] = set()
    while len(larger_set) < sample_count:
        r = rng.randint(2, max_subset)
        larger_set.add(tuple(sorted(rng.sample(range(size), r))))
    return singles + sorted(larger_set)
