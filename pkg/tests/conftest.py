"""Shared fixtures: the model catalog and cached scale functions."""

import numpy as np
import pytest

from levyfluct import ScaleFunction, canonical_models


@pytest.fixture(scope="session")
def catalog():
    return canonical_models()


class _ScaleCache:
    def __init__(self):
        self._store = {}

    def get(self, model, q, **kwargs):
        key = (id(model), q, tuple(sorted(kwargs.items())))
        if key not in self._store:
            self._store[key] = ScaleFunction(model, q, **kwargs)
        return self._store[key]


@pytest.fixture(scope="session")
def scale_cache():
    return _ScaleCache()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
