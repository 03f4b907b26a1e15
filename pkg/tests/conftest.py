import functools

import pytest

from pebres.dag import make_pyramid, make_tree


@functools.lru_cache(maxsize=None)
def pyramid(h):
    return make_pyramid(h)


@functools.lru_cache(maxsize=None)
def tree(h):
    return make_tree(h)


@pytest.fixture
def p2():
    return pyramid(2)


@pytest.fixture
def p6():
    return pyramid(6)
