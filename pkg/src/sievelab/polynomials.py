"""Exact integer polynomials, reduction mod p, and univariate gcd over F_p.

IntPolynomial stores a sparse {exponent-tuple: coefficient} map with Python
integer coefficients, so evaluation never overflows.  ModPPolynomial is the
image mod a prime p; its univariate gcd is the classifier primitive for
local-factor work.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import PreconditionError, UnsupportedCaseError


class IntPolynomial:
    """Immutable multivariate polynomial with exact integer coefficients."""

    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], int]):
        if nvars < 1:
            raise PreconditionError(f"nvars must be >= 1, got {nvars}")
        clean: dict[tuple[int, ...], int] = {}
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise PreconditionError(f"bad exponent tuple {exps} for nvars={nvars}")
            c = int(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if clean[exps] == 0:
                    del clean[exps]
        self.nvars = nvars
        self._terms = clean

    # ── constructors ──────────────────────────────────────────────────

    @classmethod
    def constant(cls, c: int, nvars: int = 1) -> "IntPolynomial":
        return cls(nvars, {(0,) * nvars: int(c)})

    @classmethod
    def variable(cls, index: int = 0, nvars: int = 1) -> "IntPolynomial":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1})

    @classmethod
    def univariate(cls, coeffs: Sequence[int]) -> "IntPolynomial":
        """Build from [c0, c1, c2, ...] meaning c0 + c1*y + c2*y^2 + ..."""
        return cls(1, {(i,): c for i, c in enumerate(coeffs)})

    # ── structure ─────────────────────────────────────────────────────

    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_term(self) -> int:
        return self._terms.get((0,) * self.nvars, 0)

    def degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def content(self) -> int:
        """gcd of all coefficients (0 for the zero polynomial)."""
        g = 0
        for c in self._terms.values():
            g = _gcd_int(g, abs(c))
        return g

    # ── arithmetic ────────────────────────────────────────────────────

    def _coerce(self, other) -> "IntPolynomial":
        if isinstance(other, IntPolynomial):
            if other.nvars != self.nvars:
                raise PreconditionError("mixed variable counts")
            return other
        if isinstance(other, int):
            return IntPolynomial.constant(other, self.nvars)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "IntPolynomial":
        other = self._coerce(other)
        merged = dict(self._terms)
        for e, c in other._terms.items():
            merged[e] = merged.get(e, 0) + c
        return IntPolynomial(self.nvars, merged)

    __radd__ = __add__

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "IntPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "IntPolynomial":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "IntPolynomial":
        other = self._coerce(other)
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return IntPolynomial(self.nvars, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntPolynomial)
            and self.nvars == other.nvars
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        return hash((self.nvars, tuple(sorted(self._terms.items()))))

    # ── evaluation ────────────────────────────────────────────────────

    def evaluate(self, point: Sequence[int] | int) -> int:
        """Exact value at an integer point (scalar allowed when nvars == 1)."""
        if isinstance(point, int):
            point = (point,)
        if len(point) != self.nvars:
            raise PreconditionError(
                f"need {self.nvars} coordinates, got {len(point)}"
            )
        total = 0
        for exps, c in self._terms.items():
            v = c
            for x, e in zip(point, exps):
                if e:
                    v *= x**e
            total += v
        return total

    def reduce_mod(self, p: int) -> "ModPPolynomial":
        return ModPPolynomial(p, self.nvars, self._terms)

    def scale_variable(self, index: int, factor: int) -> "IntPolynomial":
        """Substitute x_index -> factor * x_index."""
        out: dict[tuple[int, ...], int] = {}
        for exps, c in self._terms.items():
            out[exps] = out.get(exps, 0) + c * factor ** exps[index]
        return IntPolynomial(self.nvars, out)

    # ── display ───────────────────────────────────────────────────────

    def __repr__(self) -> str:
        return f"IntPolynomial({self})"

    def __str__(self) -> str:
        return _format_terms(self._terms, self.nvars)


class ModPPolynomial:
    """Polynomial over F_p; coefficients normalized to [1, p-1]."""

    __slots__ = ("p", "nvars", "_terms")

    def __init__(self, p: int, nvars: int, terms: Mapping[tuple[int, ...], int]):
        if p < 2:
            raise PreconditionError(f"modulus must be a prime >= 2, got {p}")
        self.p = p
        self.nvars = nvars
        clean: dict[tuple[int, ...], int] = {}
        for e, c in terms.items():
            c = int(c) % p
            if c:
                clean[tuple(e)] = c
        self._terms = clean

    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def lift(self) -> IntPolynomial:
        """Representative with coefficients in [0, p)."""
        return IntPolynomial(self.nvars, self._terms)

    def coeff_list(self) -> list[int]:
        """Ascending coefficient list; univariate only."""
        if self.nvars != 1:
            raise UnsupportedCaseError("coeff_list is univariate-only")
        if not self._terms:
            return []
        deg = max(e[0] for e in self._terms)
        out = [0] * (deg + 1)
        for (e,), c in self._terms.items():
            out[e] = c
        return out

    def eval_grid(self) -> np.ndarray:
        """Values over the full grid F_p^nvars, shape (p,) * nvars.

        Vectorized per term; intermediates are reduced mod p so everything
        stays inside int64.
        """
        p, d = self.p, self.nvars
        acc = np.zeros((p,) * d, dtype=np.int64)
        col = np.arange(p, dtype=np.int64)
        for exps, c in self._terms.items():
            term = np.full((1,) * d, c % p, dtype=np.int64)
            for axis, e in enumerate(exps):
                if e == 0:
                    continue
                shape = [1] * d
                shape[axis] = p
                axis_pows = _pow_mod_array(col, e, p).reshape(shape)
                term = term * axis_pows % p
            acc = (acc + term) % p
        return acc

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModPPolynomial)
            and (self.p, self.nvars, self._terms)
            == (other.p, other.nvars, other._terms)
        )

    def __hash__(self) -> int:
        return hash((self.p, self.nvars, tuple(sorted(self._terms.items()))))

    def __repr__(self) -> str:
        return f"ModPPolynomial(p={self.p}, {_format_terms(self._terms, self.nvars)})"


def _pow_mod_array(base: np.ndarray, e: int, p: int) -> np.ndarray:
    out = np.ones_like(base)
    b = base % p
    while e:
        if e & 1:
            out = out * b % p
        b = b * b % p
        e >>= 1
    return out


def mod_p_gcd(a: ModPPolynomial, b: ModPPolynomial) -> ModPPolynomial:
    """Monic gcd of two univariate polynomials over the same F_p.

    gcd(f, 0) is f made monic; gcd(0, 0) is 0.  Multivariate input is out
    of scope and raises UnsupportedCaseError.
    """
    if a.p != b.p:
        raise PreconditionError(f"mixed moduli {a.p} and {b.p}")
    if a.nvars != 1 or b.nvars != 1:
        raise UnsupportedCaseError("gcd over F_p is implemented for one variable")
    p = a.p
    fa, fb = a.coeff_list(), b.coeff_list()
    while fb:
        fa, fb = fb, _poly_mod(fa, fb, p)
    return ModPPolynomial(p, 1, {(i,): c for i, c in enumerate(_make_monic(fa, p))})


def _poly_mod(num: list[int], den: list[int], p: int) -> list[int]:
    num = [c % p for c in num]
    inv_lead = pow(den[-1], p - 2, p)
    while len(num) >= len(den):
        if num[-1]:
            q = num[-1] * inv_lead % p
            off = len(num) - len(den)
            for i, c in enumerate(den):
                num[off + i] = (num[off + i] - q * c) % p
        num.pop()
    while num and num[-1] == 0:
        num.pop()
    return num

def _make_monic(coeffs: list[int], p: int) -> list[int]:
    if not coeffs:
        return []
    inv = pow(coeffs[-1], p - 2, p)
    return [c * inv % p for c in coeffs]


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# ── parsing and printing (CLI surface) ────────────────────────────────

_TERM_RE = re.compile(
    r"""^
    (?P<coef>\d+)? (?P<star>\*)?   # optional integer coefficient and star
    (?P<var>y)?                    # optional variable
    (?:\^(?P<exp>\d+))?            # optional exponent (needs the variable)
    $""",
    re.VERBOSE,
)


def parse_polynomial(text: str) -> IntPolynomial:
    """Parse one univariate polynomial like '2*y^3 - y + 5'.

    Grammar: integer terms 'c*y^e' joined by '+'/'-'; 'c', '*', and '^e'
    parts are each optional ('y' alone means 1*y^1).  Whitespace is free.
    """
    s = text.replace(" ", "")
    if not s:
        raise PreconditionError("empty polynomial")
    # Normalize to explicitly signed terms, then split.
    if s[0] not in "+-":
        s = "+" + s
    pieces = re.findall(r"[+-][^+-]+", s)
    if "".join(pieces) != s:
        raise PreconditionError(f"cannot parse polynomial {text!r}")
    terms: dict[tuple[int, ...], int] = {}
    for piece in pieces:
        sign = -1 if piece[0] == "-" else 1
        m = _TERM_RE.match(piece[1:])
        if not m or not piece[1:]:
            raise PreconditionError(f"bad term {piece!r} in polynomial {text!r}")
        if (m.group("star") or m.group("exp")) and not m.group("var"):
            raise PreconditionError(f"bad term {piece!r} in polynomial {text!r}")
        coef = int(m.group("coef")) if m.group("coef") else 1
        if m.group("var") is None and m.group("coef") is None:
            raise PreconditionError(f"bad term {piece!r} in polynomial {text!r}")
        exp = 0
        if m.group("var"):
            exp = int(m.group("exp")) if m.group("exp") else 1
        terms[(exp,)] = terms.get((exp,), 0) + sign * coef
    return IntPolynomial(1, terms)


def parse_polynomial_list(text: str) -> list[IntPolynomial]:
    """Comma-separated polynomials, e.g. 'y^2, 2*y^2'."""
    parts = [p for p in text.split(",")]
    if not parts or not any(p.strip() for p in parts):
        raise PreconditionError("empty polynomial list")
    return [parse_polynomial(p) for p in parts]


def _format_terms(terms: Mapping[tuple[int, ...], int], nvars: int) -> str:
    if not terms:
        return "0"
    names = ["y"] if nvars == 1 else [f"y{i}" for i in range(nvars)]
    bits: list[str] = []
    for exps, c in sorted(terms.items(), reverse=True):
        var = "*".join(
            (names[i] if e == 1 else f"{names[i]}^{e}")
            for i, e in enumerate(exps)
            if e
        )
        mag = abs(c)
        if not var:
            body = str(mag)
        elif mag == 1:
            body = var
        else:
            body = f"{mag}*{var}"
        sign = "-" if c < 0 else "+"
        bits.append(f"{sign} {body}")
    out = " ".join(bits)
    return out[2:] if out.startswith("+ ") else "-" + out[2:]
