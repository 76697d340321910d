"""Shared fixtures: one toy-scale key set, built once per session.

Key generation is cheap (~5 ms) but the multiplication key takes ~40 ms,
and dozens of tests need one; building them once keeps the suite fast
without hiding any behavior (tests that care about key variability build
their own keys with their own seeds).
"""

import pytest
from random import Random

from mvphe import build_evalkey, keygen, preset_params


@pytest.fixture(scope="session")
def toy_params():
    return preset_params("toy")


@pytest.fixture(scope="session")
def toy_sk(toy_params):
    return keygen(toy_params, Random("conftest-toy"))


@pytest.fixture(scope="session")
def toy_evk(toy_sk):
    return build_evalkey(toy_sk, rng=Random("conftest-toy-evk"))


@pytest.fixture(scope="session")
def small_params():
    return preset_params("small")


@pytest.fixture(scope="session")
def small_sk(small_params):
    return keygen(small_params, Random("conftest-small"))
