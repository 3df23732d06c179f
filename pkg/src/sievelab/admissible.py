"""Admissible tuples: verification with per-prime witnesses, residue sets,
and a deterministic narrow-tuple search.

A tuple (h_1 < ... < h_k) of non-negative integers is admissible when for
every prime p there is a residue class a_p avoided by all h_i mod p.  Only
primes p <= k can cover all classes (k values cannot occupy p > k classes),
so verification is finite and the witness map records one avoided class for
each prime p <= k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .arith import _base_primes
from .errors import CapacityError, PreconditionError


@dataclass(frozen=True)
class HTuple:
    """Sorted tuple of distinct non-negative shift offsets."""

    h: tuple[int, ...]

    def __post_init__(self):
        if not self.h:
            raise PreconditionError("empty tuple")
        if any(x < 0 for x in self.h):
            raise PreconditionError(f"negative offsets in {self.h}")
        if any(a >= b for a, b in zip(self.h, self.h[1:])):
            raise PreconditionError(f"offsets must be strictly increasing: {self.h}")

    @classmethod
    def of(cls, values: Iterable[int]) -> "HTuple":
        return cls(tuple(sorted(int(v) for v in values)))

    @property
    def k(self) -> int:
        return len(self.h)

    @property
    def diameter(self) -> int:
        return self.h[-1] - self.h[0]


@dataclass(frozen=True)
class AdmissibilityWitness:
    """One avoided residue class per prime p <= k, keyed by p."""

    avoided: dict[int, int]


@dataclass(frozen=True)
class AdmissibilityResult:
    admissible: bool
    witness: AdmissibilityWitness | None
    covering_prime: int | None

    def __bool__(self) -> bool:
        return self.admissible


def is_admissible(t: HTuple) -> AdmissibilityResult:
    """Check admissibility; exact, with a witness or the covering prime.

    Scans primes p <= k only: for p > k the k offsets occupy at most k < p
    classes, so some class is always avoided (pigeonhole).
    """
    avoided: dict[int, int] = {}
    for p in _base_primes(t.k):
        seen = bytearray(p)
        for h in t.h:
            seen[h % p] = 1
        free = seen.find(0)
        if free < 0:
            return AdmissibilityResult(False, None, p)
        avoided[p] = free  # smallest class no offset occupies mod p
    return AdmissibilityResult(True, AdmissibilityWitness(avoided), None)


def allowed_residues(t: HTuple, p: int) -> list[int]:
    """Residues b mod p with b + h_i != 0 mod p for every offset h_i."""
    if p < 2:
        raise PreconditionError(f"prime must be >= 2, got {p}")
    blocked = bytearray(p)
    for h in t.h:
        blocked[(-h) % p] = 1
    return [b for b in range(p) if not blocked[b]]


def wtrick_residues(t: HTuple, W: int) -> list[int]:
    """All b in [0, W) with b + h_i not divisible by any prime p | W.

    W must be squarefree (it is a primorial in the intended use).  The
    result is assembled by the Chinese Remainder Theorem from the per-prime
    allowed residues, so its cardinality is the product of the per-prime
    counts; an enumeration larger than 10**7 raises CapacityError.
    """
    if W < 1:
        raise PreconditionError(f"W must be >= 1, got {W}")
    if W == 1:
        return [0]
    factors = _factor_squarefree(W)
    residue_sets = [allowed_residues(t, p) for p in factors]
    total = 1
    for rs in residue_sets:
        total *= len(rs)
    if total > 10**7:
        raise CapacityError(f"X_W enumeration would hold {total} residues")
    out = []
    for combo in itertools.product(*residue_sets):
        b = _crt(combo, factors)
        out.append(b)
    return sorted(out)


def _factor_squarefree(W: int) -> list[int]:
    factors = []
    m = W
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                raise PreconditionError(f"W={W} is not squarefree")
            factors.append(p)
        p += 1
    if m > 1:
        factors.append(m)
    return factors


def _crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    b, m = 0, 1
    for r, p in zip(residues, moduli):
        # solve b + m*x == r (mod p)
        x = (r - b) * pow(m % p, p - 2, p) % p
        b += m * x
        m *= p
    return b % m


# ── narrow-tuple search ───────────────────────────────────────────────


@dataclass(frozen=True)
class TupleSearchResult:
    tuple: HTuple
    ok: bool  # diameter <= requested bound
    evaluations: int


def search_narrow_tuple(
    k: int, max_diameter: int, budget: int = 2_000_000
) -> TupleSearchResult:
    """Search for an admissible k-tuple of diameter <= max_diameter.

    Deterministic: greedy seeds (k consecutive primes beyond k, shifted to
    start at 0), first-improvement local search moving one element at a
    time inside the current diameter window with lexicographic
    tie-breaking, and a residue-sieve backtracking phase over the window
    [0, max_diameter] when the swap neighborhood stalls.  On budget
    exhaustion the best tuple found is returned with ok=False rather than
    raising.
    """
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if max_diameter < 0 or budget < 1:
        raise PreconditionError("max_diameter must be >= 0 and budget >= 1")

    state = _SearchBudget(budget)
    best: list[int] | None = None

    # Phase 1: prime-window seeds polished by single-element moves.
    for seed in _prime_window_seeds(k, attempts=8):
        cur = _local_search(seed, state)
        if best is None or _key(cur) < _key(best):
            best = cur
        if best[-1] - best[0] <= max_diameter or state.exhausted:
            break

    assert best is not None
    # Phase 2: admissible-survivor backtracking pinned to the target window.
    if best[-1] - best[0] > max_diameter and not state.exhausted:
        sieved = _window_sieve_search(k, max_diameter, state)
        if sieved is not None:
            cur = _local_search(sieved, state)
            if _key(cur) < _key(best):
                best = cur

    t = HTuple.of(best)
    return TupleSearchResult(t, t.diameter <= max_diameter, state.used)


class _SearchBudget:
    __slots__ = ("remaining", "used")

    def __init__(self, budget: int):
        self.remaining = budget
        self.used = 0

    def spend(self, n: int = 1) -> bool:
        take = min(n, self.remaining)
        self.remaining -= take
        self.used += take
        return self.remaining > 0

    @property
    def exhausted(self) -> bool:
        return self.remaining <= 0


def _prime_window_seeds(k: int, attempts: int) -> Iterable[list[int]]:
    """Windows of k consecutive primes > k, each shifted to start at 0."""
    bound = max(4 * k * (_ilog2(k) + 2), 64)
    primes = [p for p in _base_primes(bound) if p > k]
    while len(primes) < k + attempts:
        bound *= 2
        primes = [p for p in _base_primes(bound) if p > k]
    for i in range(attempts):
        window = primes[i : i + k]
        yield [p - window[0] for p in window]


def _ilog2(n: int) -> int:
    return max(n, 1).bit_length() - 1


def _key(h: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    return (h[-1] - h[0], tuple(h))


def _local_search(start: list[int], state: _SearchBudget) -> list[int]:
    """First-improvement descent on (diameter, tuple) lexicographic order.

    Moves replace one element with a vacant value inside the current
    window.  Residue counts per prime p <= k are maintained incrementally
    so each candidate costs O(pi(k)).
    """
    k = len(start)
    primes = _base_primes(k)
    h = sorted(v - min(start) for v in start)
    if not is_admissible(HTuple.of(h)).admissible:
        raise PreconditionError("local search must start from an admissible tuple")

    improved = True
    while improved and not state.exhausted:
        improved = False
        counts = {p: _residue_counts(h, p) for p in primes}
        for i in range(k):
            hi = h[i]
            # residue classes that would complete a full covering if hit
            forbidden: list[tuple[int, int]] = []
            dead = False
            for p in primes:
                c = counts[p]
                c[hi % p] -= 1
                covered = sum(1 for v in c if v)
                if covered == p:
                    dead = True  # remaining k-1 offsets already cover F_p
                elif covered == p - 1:
                    free = next(r for r in range(p) if not c[r])
                    forbidden.append((p, free))
            if not dead:
                move = _best_single_move(h, i, forbidden, state)
                if move is not None:
                    h = move
                    improved = True
            for p in primes:
                counts[p][hi % p] += 1
            if improved or state.exhausted:
                break
    return h


def _residue_counts(h: Sequence[int], p: int) -> list[int]:
    c = [0] * p
    for v in h:
        c[v % p] += 1
    return c


def _best_single_move(
    h: list[int], i: int, forbidden: list[tuple[int, int]], state: _SearchBudget
) -> list[int] | None:
    """First candidate position (ascending) that strictly improves the key."""
    occupied = set(h)
    cur_key = _key(h)
    rest = h[:i] + h[i + 1 :]
    if not rest:
        return None  # k = 1: {0} is already minimal
    lo, hi = rest[0], rest[-1]
    span = h[-1] - h[0]
    # Candidates range over the window that could improve or tie the
    # diameter; values beyond max(hi, lo + span) only worsen it.
    for v in range(max(0, hi - span), lo + span + 1):
        if v in occupied:
            continue
        if not state.spend():
            return None
        if any(v % p == r for p, r in forbidden):
            continue
        cand = sorted(rest + [v])
        cand = [x - cand[0] for x in cand]
        if _key(cand) < cur_key:
            return cand
    return None


def _window_sieve_search(
    k: int, D: int, state: _SearchBudget
) -> list[int] | None:
    """Backtracking over avoided classes a_p, keeping survivors in [0, D].

    Depth-first over primes p <= k in increasing order; at each prime the
    candidate classes are ordered by how few survivors they delete (ties:
    smaller class first), so the leftmost branch reproduces the greedy
    sieve.  Prunes branches whose survivor count drops below k.  Returns
    the first set of >= k survivors found, trimmed to its k tightest
    values, or None.
    """
    primes = _base_primes(k)
    survivors = list(range(D + 1))

    def descend(idx: int, alive: list[int]) -> list[int] | None:
        if len(alive) < k or state.exhausted:
            return None
        if idx == len(primes):
            return _tightest_window(alive, k)
        p = primes[idx]
        by_class: dict[int, int] = {r: 0 for r in range(p)}
        for v in alive:
            by_class[v % p] += 1
        order = sorted(range(p), key=lambda r: (by_class[r], r))
        for r in order:
            if not state.spend(max(1, by_class[r])):
                return None
            nxt = [v for v in alive if v % p != r]
            found = descend(idx + 1, nxt)
            if found is not None:
                return found
        return None

    return descend(0, survivors)


def _tightest_window(values: list[int], k: int) -> list[int]:
    best = values[:k]
    width = best[-1] - best[0]
    for j in range(1, len(values) - k + 1):
        w = values[j + k - 1] - values[j]
        if w < width:
            best = values[j : j + k]
            width = w
    return [v - best[0] for v in best]


# ── tuple files ───────────────────────────────────────────────────────


def parse_tuple_line(text: str) -> HTuple:
    """One line of whitespace-separated offsets, sorted, no duplicates."""
    parts = text.split()
    if not parts:
        raise PreconditionError("empty tuple line")
    try:
        values = [int(p) for p in parts]
    except ValueError as e:
        raise PreconditionError(f"non-integer entry in tuple line: {e}") from None
    if any(b <= a for a, b in zip(values, values[1:])):
        raise PreconditionError("tuple file entries must be strictly increasing")
    return HTuple(tuple(values))


def load_tuple_file(path) -> HTuple:
    with open(path, "r", encoding="ascii") as fh:
        content = fh.read().strip()
    if "\n" in content:
        raise PreconditionError(f"tuple file {path} must hold a single line")
    return parse_tuple_line(content)


def save_tuple_file(path, t: HTuple) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(" ".join(str(v) for v in t.h) + "\n")


def bundled_tuple50() -> HTuple:
    """The shipped admissible 50-tuple of diameter 246, re-verified at load."""
    text = resources.files("sievelab.data").joinpath("tuple50.txt").read_text()
    t = parse_tuple_line(text.strip())
    if t.k != 50:
        raise PreconditionError(f"bundled tuple has k={t.k}, expected 50")
    if t.diameter > 246:
        raise PreconditionError(f"bundled tuple diameter {t.diameter} exceeds 246")
    if not is_admissible(t).admissible:
        raise PreconditionError("bundled tuple failed admissibility verification")
    return t
