import numpy as np
import pytest

from qflow.fields import Grid, ScalarField


def make_rng(seed, stream=0):
    """Counter-based generator so corpora are reproducible across platforms."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) + np.uint64(stream)))


def random_field(grid, rng, complex_valued=True):
    vals = rng.standard_normal(grid.shape)
    if complex_valued:
        vals = vals + 1j * rng.standard_normal(grid.shape)
    return ScalarField(grid, vals)


def band_limited_field(grid, rng, kmax=4, real=True, zero_mean=True):
    """Random field supported on modes |k|_inf <= kmax."""
    shape = grid.shape
    spec = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    meshes = np.meshgrid(*([k] * grid.n), indexing="ij")
    mask = np.ones(shape, dtype=bool)
    for m in meshes:
        mask &= np.abs(m) <= kmax
    spec = np.where(mask, spec, 0.0)
    if zero_mean:
        spec[(0,) * grid.n] = 0.0
    if real:
        rev = tuple(slice(None, None, -1) for _ in range(grid.n))
        conj = np.conj(np.roll(spec[rev], 1, axis=tuple(range(grid.n))))
        spec = 0.5 * (spec + conj)
    vals = np.fft.ifftn(spec)
    return ScalarField(grid, vals)


@pytest.fixture
def grid2():
    return Grid(n=2, N=32, L=2 * np.pi)


@pytest.fixture
def grid2_small():
    return Grid(n=2, N=8, L=1.0)


@pytest.fixture
def grid3_small():
    return Grid(n=3, N=8, L=1.0)
