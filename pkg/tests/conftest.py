import pytest

import pseudohopf as ph
from pseudohopf import sweepfit
from pseudohopf.fields import GALLERY


@pytest.fixture(scope="session")
def gallery():
    """Build-once cache of gallery systems (value objects, safe to share)."""
    cache = {}

    def get(name, **params):
        key = (name, tuple(sorted(params.items())))
        if key not in cache:
            cache[key] = ph.make_builtin(name, **params)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def sweeps(gallery):
    """Run-once default-grid sweep per gallery system."""
    cache = {}

    def get(name, **params):
        key = (name, tuple(sorted(params.items())))
        if key not in cache:
            system = gallery(name, **params)
            g = GALLERY[name].grid
            grid = sweepfit.SweepGrid(b_max=g[0], ratio=g[1], count=g[2])
            cache[key] = sweepfit.sweep(system, grid)
        return cache[key]

    return get


def default_grid(name):
    g = GALLERY[name].grid
    return sweepfit.SweepGrid(b_max=g[0], ratio=g[1], count=g[2])
