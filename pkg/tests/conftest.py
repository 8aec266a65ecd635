import numpy as np
import pytest

from nvscatter.grid import make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(20.0, 64)


def band_limited(grid, rng, modes=6, complex_=False):
    """Random trigonometric polynomial with |m| <= modes on each axis."""
    m = np.arange(-modes, modes + 1)
    c = rng.normal(size=(len(m), len(m))) + 1j * rng.normal(size=(len(m), len(m)))
    x1, x2 = grid.mesh
    k = 2 * np.pi / grid.L
    e1 = np.exp(1j * k * np.multiply.outer(x1, m))  # (N, N, M)
    e2 = np.exp(1j * k * np.multiply.outer(x2, m))
    out = np.einsum("ija,ijb,ab->ij", e1, e2, c)
    return out if complex_ else out.real
