"""Shared fixtures: prime tables and small contexts are expensive enough
to build once per session."""

import pytest

from sievelab import HTuple, build_evaluator, choose_parameters, sieve


@pytest.fixture(scope="session")
def table_10k():
    return sieve(10_000)


@pytest.fixture(scope="session")
def table_1m():
    return sieve(1_000_000)


@pytest.fixture(scope="session")
def ctx_single():
    """k=1 context at nprime=2e4: N=1e4, W=2, R=2.51."""
    return choose_parameters(20_000, HTuple.of([0]), 0, 0.5, eta0=0.1)


@pytest.fixture(scope="session")
def ev_single(ctx_single):
    return build_evaluator(ctx_single)


@pytest.fixture(scope="session")
def ctx_pair():
    """k=2 context for the {0,2} tuple at nprime=1e5."""
    return choose_parameters(100_000, HTuple.of([0, 2]), 1, 0.4, eta0=1 / 9)


@pytest.fixture(scope="session")
def ev_pair(ctx_pair):
    return build_evaluator(ctx_pair)
