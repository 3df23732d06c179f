"""Admissibility against the covering definition, and residue classes."""

import itertools
import math

import pytest

from sievelab import (
    HTuple,
    PreconditionError,
    bundled_tuple50,
    is_admissible,
    primorial,
    search_narrow_tuple,
    wtrick_residues,
)
from sievelab.admissible import (
    allowed_residues,
    load_tuple_file,
    parse_tuple_line,
    save_tuple_file,
)


def _covers_all_residues(h, p):
    return len({x % p for x in h}) == p


def _admissible_by_definition(h):
    # Only primes p <= len(h) can be fully covered.
    return all(not _covers_all_residues(h, p) for p in (2, 3, 5, 7, 11, 13) if p <= len(h))


def test_matches_definition_on_small_tuples():
    for k in (1, 2, 3):
        for combo in itertools.combinations(range(9), k):
            got = bool(is_admissible(HTuple.of(combo)))
            assert got == _admissible_by_definition(combo), combo


def test_witness_and_covering_prime_are_real():
    for combo in itertools.combinations(range(11), 3):
        res = is_admissible(HTuple.of(combo))
        if res.admissible:
            for p, r in res.witness.avoided.items():
                assert all(x % p != r for x in combo), (combo, p, r)
        else:
            assert _covers_all_residues(combo, res.covering_prime)


def test_classic_examples():
    assert is_admissible(HTuple.of([0, 2, 6])).admissible
    assert is_admissible(HTuple.of([0, 4, 6])).admissible
    assert not is_admissible(HTuple.of([0, 2, 4])).admissible
    assert not is_admissible(HTuple.of([0, 1])).admissible


def test_tuple_validation():
    with pytest.raises(PreconditionError):
        HTuple.of([])
    with pytest.raises(PreconditionError):
        HTuple.of([0, 0, 2])
    with pytest.raises(PreconditionError):
        HTuple.of([-2, 0])


def test_allowed_residues_brute(table_10k):
    t = HTuple.of([0, 2, 6])
    for p in (2, 3, 5, 7, 11):
        got = allowed_residues(t, p)
        expect = [
            b
            for b in range(p)
            if all(math.gcd(b + h, p) == 1 for h in t.h)
        ]
        assert got == expect


def test_wtrick_residues_example_and_crt_count():
    assert wtrick_residues(HTuple.of([0, 2, 6]), 30) == [11, 17]
    t = HTuple.of([0, 2, 6])
    for w in (2, 3, 5, 7):
        W = primorial(w)
        got = wtrick_residues(t, W)
        brute = [
            b
            for b in range(W)
            if all(math.gcd(b + h, W) == 1 for h in t.h)
        ]
        assert got == brute
        # CRT: the count multiplies over prime factors of W.
        expect = 1
        for p in (2, 3, 5, 7):
            if W % p == 0:
                expect *= len(allowed_residues(t, p))
        assert len(got) == expect


def test_narrow_search_small():
    res = search_narrow_tuple(3, 6)
    assert res.ok
    assert res.tuple.diameter <= 6
    assert is_admissible(res.tuple).admissible


def test_narrow_search_degenerate_cases():
    assert search_narrow_tuple(1, 0).ok
    with pytest.raises(PreconditionError):
        search_narrow_tuple(0, 6)


def test_bundled_tuple_is_wide_enough():
    t = bundled_tuple50()
    assert t.k == 50
    assert t.diameter <= 246
    assert is_admissible(t).admissible


def test_tuple_file_round_trip(tmp_path):
    t = HTuple.of([0, 4, 6, 10])
    path = tmp_path / "t.txt"
    save_tuple_file(path, t)
    assert load_tuple_file(path) == t
    with pytest.raises(PreconditionError):
        parse_tuple_line("3 1 2")  # unsorted
    with pytest.raises(PreconditionError):
        parse_tuple_line("1 1")  # duplicate
    with pytest.raises(PreconditionError):
        parse_tuple_line("one two")
