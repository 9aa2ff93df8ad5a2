"""Shared fixtures: the 3-bit worked example and small random instances."""
import numpy as np
import pytest

from adiasearch.components.database import Database, SearchTarget, random_database

EXAMPLE_VALUES = (6, 3, 5, 0, 4, 1, 7, 2)


@pytest.fixture
def example_db():
    return Database(3, EXAMPLE_VALUES)


@pytest.fixture
def example_target():
    return SearchTarget(5, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_db():
    return random_database(4, seed=7)
