"""Exact integer arithmetic substrate: prime tables and multiplicative functions.

Everything here is exact. The sieve produces a least-prime-factor table so
that factorization of any n <= limit is a chain lookup, and factorization
of moderately larger n falls back to trial division by the tabled primes
plus a deterministic Miller-Rabin primality test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, PreconditionError

# Fixed segment size keeps the marking working set cache-sized and the
# memory profile independent of the limit.
_SEGMENT = 1 << 20

# uint32 least-prime-factor entries: 4 bytes per integer.  2e8 needs ~800 MB,
# which fits the build machines this targets; beyond that, refuse.
SIEVE_CAP = 200_000_000

# Witness set proving primality for all n < 3.3e24 (Sorenson-Webster).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_VALID_BELOW = 3_317_044_064_679_887_385_961_981


@dataclass(frozen=True)
class PrimeTable:
    """Least-prime-factor table for [0, limit] plus the sorted prime list.

    lpf[n] is the smallest prime dividing n for 2 <= n <= limit;
    lpf[0] = lpf[1] = 0.  primes holds every prime <= limit in order.
    """

    limit: int
    lpf: np.ndarray
    primes: np.ndarray

    def is_prime(self, n: int) -> bool:
        """Primality for arbitrary n >= 0 (table lookup, then Miller-Rabin)."""
        if n < 2:
            return False
        if n <= self.limit:
            return int(self.lpf[n]) == n
        return is_probable_prime(n)

    def primes_upto(self, bound: float) -> np.ndarray:
        """Primes p <= bound as an int64 array (bound may exceed no table)."""
        if bound > self.limit:
            raise PreconditionError(
                f"primes_upto({bound}) exceeds table limit {self.limit}"
            )
        hi = int(np.searchsorted(self.primes, int(math.floor(bound)), side="right"))
        return self.primes[:hi].astype(np.int64)

    def smallest_prime_factor(self, n: int) -> int:
        """Smallest prime dividing n (n >= 2), exact for n <= limit**2.

        For n above the table limit this trial-divides by the tabled primes;
        if none divides and n <= limit**2 the number is prime.  Larger n get
        a Miller-Rabin check; a composite with no tabled factor is out of
        reach and raises CapacityError.
        """
        if n < 2:
            raise PreconditionError(f"smallest_prime_factor needs n >= 2, got {n}")
        if n <= self.limit:
            return int(self.lpf[n])
        root = math.isqrt(n)
        cut = int(np.searchsorted(self.primes, min(root, self.limit), side="right"))
        for lo in range(0, cut, 4096):
            chunk = self.primes[lo : min(lo + 4096, cut)].astype(np.int64)
            hits = chunk[n % chunk == 0]
            if hits.size:
                return int(hits[0])
        if root <= self.limit:
            return n
        if is_probable_prime(n):
            return n
        raise CapacityError(
            f"cannot determine the least prime factor of {n}: composite with "
            f"no factor <= {self.limit}; sieve a larger table"
        )

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorization [(p, e), ...] with p ascending.  n >= 1."""
        if n < 1:
            raise PreconditionError(f"factorize needs n >= 1, got {n}")
        out: list[tuple[int, int]] = []
        while n > 1:
            p = self.smallest_prime_factor(n)
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def mobius(self, n: int) -> int:
        if n < 1:
            raise PreconditionError(f"mobius needs n >= 1, got {n}")
        mu = 1
        for _, e in self.factorize(n):
            if e > 1:
                return 0
            mu = -mu
        return mu

    def euler_phi(self, n: int) -> int:
        if n < 1:
            raise PreconditionError(f"euler_phi needs n >= 1, got {n}")
        phi = n
        for p, _ in self.factorize(n):
            phi -= phi // p
        return phi


def sieve(limit: int) -> PrimeTable:
    """Segmented least-prime-factor sieve over [0, limit].

    Args:
        limit: inclusive upper bound, 2 <= limit <= SIEVE_CAP.

    Returns:
        PrimeTable with the lpf array and the sorted prime list.

    Raises:
        CapacityError: limit outside [2, SIEVE_CAP].
    """
    if limit < 2 or limit > SIEVE_CAP:
        raise CapacityError(f"sieve limit must lie in [2, {SIEVE_CAP}], got {limit}")

    n = limit + 1
    lpf = np.zeros(n, dtype=np.uint32)
    base_primes = _base_primes(math.isqrt(limit))

    prime_chunks: list[np.ndarray] = []
    for seg_start in range(0, n, _SEGMENT):
        seg_end = min(seg_start + _SEGMENT, n)
        seg = lpf[seg_start:seg_end]
        for p in base_primes:
            start = max(p * p, ((seg_start + p - 1) // p) * p)
            if start >= seg_end:
                break  # base_primes ascend, so every later p*p lies beyond too
            view = seg[start - seg_start :: p]
            view[view == 0] = p
        idx = np.flatnonzero(seg == 0).astype(np.int64) + seg_start
        if seg_start == 0:
            idx = idx[idx >= 2]
        seg[idx - seg_start] = idx  # untouched entries are prime
        prime_chunks.append(idx)

    primes = np.concatenate(prime_chunks)
    return PrimeTable(limit=limit, lpf=lpf, primes=primes)


def _base_primes(root: int) -> list[int]:
    """Plain sieve of [2, root]; root is small (sqrt of the table limit)."""
    if root < 2:
        return []
    flags = np.ones(root + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(root) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(flags)]


def is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24, probabilistic far beyond."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_VALID_BELOW:  # pragma: no cover - desk scale stays far below
        raise CapacityError(f"primality test witness set not proven for {n}")
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primorial(w: int) -> int:
    """Product of all primes p <= w (empty product = 1)."""
    if w < 0:
        raise PreconditionError(f"primorial needs w >= 0, got {w}")
    out = 1
    for p in _base_primes(w):
        out *= p
    return out


def euler_phi_int(n: int) -> int:
    """Euler phi by direct trial division; independent of any PrimeTable."""
    if n < 1:
        raise PreconditionError(f"euler_phi_int needs n >= 1, got {n}")
    phi = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            phi -= phi // p
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        phi -= phi // m
    return phi
