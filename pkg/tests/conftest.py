import functools

import pytest

from simplex_spectra.stationary import census


@functools.lru_cache(maxsize=None)
def cached_census(n, m):
    return census(n, m)


@pytest.fixture
def get_census():
    return cached_census
