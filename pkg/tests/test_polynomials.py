"""Integer polynomials, mod-p reduction, and the parsing grammar."""

import numpy as np
import pytest

from sievelab import IntPolynomial, PreconditionError, parse_polynomial
from sievelab import parse_polynomial_list
from sievelab.polynomials import ModPPolynomial, mod_p_gcd


def test_arithmetic_against_direct_evaluation():
    y = IntPolynomial.variable(0)
    q = 3 * y * y - 2 * y + 7
    for v in range(-5, 6):
        assert q.evaluate(v) == 3 * v * v - 2 * v + 7
    r = (y + 1) * (y - 1)
    for v in range(-5, 6):
        assert r.evaluate(v) == v * v - 1


def test_degree_content_constant():
    y = IntPolynomial.variable(0)
    assert (y * y).degree() == 2
    assert IntPolynomial.constant(5).degree() == 0
    assert IntPolynomial.constant(0).degree() == -1
    assert (6 * y * y + 9 * y).content() == 3
    assert IntPolynomial.constant(4).constant_term() == 4
    assert (y + 3).constant_term() == 3


def test_scale_variable_matches_substitution():
    y = IntPolynomial.variable(0)
    q = y * y * y - 4 * y
    scaled = q.scale_variable(0, 7)
    for v in range(-4, 5):
        assert scaled.evaluate(v) == q.evaluate(7 * v)


def test_parse_grammar_round_trip():
    cases = {
        "y^2": lambda v: v * v,
        "2*y^2": lambda v: 2 * v * v,
        "2y^2": lambda v: 2 * v * v,
        "y^3-2*y+1": lambda v: v**3 - 2 * v + 1,
        "-y+4": lambda v: -v + 4,
        "7": lambda v: 7,
    }
    for text, f in cases.items():
        q = parse_polynomial(text)
        for v in range(-3, 4):
            assert q.evaluate(v) == f(v), text


def test_parse_list_and_errors():
    qs = parse_polynomial_list("y,2*y,y^2")
    assert [q.evaluate(3) for q in qs] == [3, 6, 9]
    for bad in ("", "y^", "x+*2", "y^-1", "2**y"):
        with pytest.raises(PreconditionError):
            parse_polynomial_list(bad)


def test_reduce_mod_and_grid():
    y = IntPolynomial.variable(0)
    q = 6 * y * y + 10 * y + 15
    for p in (2, 3, 5, 7):
        qp = q.reduce_mod(p)
        grid = qp.eval_grid()
        assert grid.shape == (p,)
        for v in range(p):
            assert int(grid[v]) == q.evaluate(v) % p


def test_mod_p_gcd_on_known_factorization():
    # gcd(x^2 - 1, x - 1) = x - 1 over F_7.
    x = IntPolynomial.variable(0)
    a = (x * x - 1).reduce_mod(7)
    b = (x - 1).reduce_mod(7)
    g = mod_p_gcd(a, b)
    assert g.coeff_list() == b.coeff_list()


def test_mod_p_gcd_random_products():
    rng = np.random.default_rng(11)
    x = IntPolynomial.variable(0)
    for _ in range(25):
        p = int(rng.choice([3, 5, 7, 11, 13]))
        # Common factor g times coprime cofactors should gcd back to g
        # up to scaling; verify by divisibility of evaluations.
        g = x + int(rng.integers(0, p))
        a = (g * (x + int(rng.integers(0, p)))).reduce_mod(p)
        b = (g * IntPolynomial.constant(1 + int(rng.integers(0, p - 1)))).reduce_mod(p)
        if a.coeff_list() == [] or b.coeff_list() == []:
            continue
        got = mod_p_gcd(a, b)
        grid = got.eval_grid()
        root = (-g.constant_term()) % p
        assert int(grid[root]) == 0


def test_multivariate_evaluate():
    x0 = IntPolynomial.variable(0, nvars=2)
    x1 = IntPolynomial.variable(1, nvars=2)
    q = x0 * x0 + 3 * x1
    assert q.evaluate((4, 5)) == 31
    assert q.nvars == 2
