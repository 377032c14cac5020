import numpy as np
import pytest

from bergman.jets import Jet, _size


def random_jet(rng, nvars=4, order=3, const=None):
    c = rng.normal(size=_size(nvars, order)) + 1j * rng.normal(size=_size(nvars, order))
    c *= 0.5
    if const is not None:
        c[0] = const
    return Jet(c, nvars, order)


def random_points(rng, n, count, rmin=0.0, rmax=0.9):
    out = []
    for _ in range(count):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        out.append(rng.uniform(rmin, rmax) * v)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20191119)
