"""Synthetic field corpora: seeded, reproducible byte for byte.

All randomness flows through a counter-based Philox generator keyed by a
single 64-bit seed, so corpora are identical across platforms and runs.
"""

from __future__ import annotations

import numpy as np

from .fields import Grid, ScalarField, VectorField
from .operators import leray_project

GENERATOR_KINDS = (
    "band-limited",
    "mode",
    "taylor-green",
    "gaussian",
    "solenoidal",
    "axis-sines",
)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) + np.uint64(stream)))


def band_limited_field(
    grid: Grid,
    seed: int,
    kmax: int = 4,
    real: bool = True,
    zero_mean: bool = True,
    stream: int = 0,
) -> ScalarField:
    """Random field supported on modes |k|_inf <= kmax."""
    rng = make_rng(seed, stream)
    spec = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    meshes = np.meshgrid(*([k] * grid.n), indexing="ij")
    mask = np.ones(grid.shape, dtype=bool)
    for m in meshes:
        mask &= np.abs(m) <= kmax
    spec = np.where(mask, spec, 0.0)
    if zero_mean:
        spec[(0,) * grid.n] = 0.0
    if real:
        rev = tuple(slice(None, None, -1) for _ in range(grid.n))
        conj = np.conj(np.roll(spec[rev], 1, axis=tuple(range(grid.n))))
        spec = 0.5 * (spec + conj)
    return ScalarField(grid, np.fft.ifftn(spec))


def pure_mode(grid: Grid, k, amplitude: complex = 1.0, real: bool = False) -> ScalarField:
    """Single complex exponential (or its sine for real=True)."""
    meshes = grid.meshes()
    phase = 2.0 * np.pi * sum(kj * m for kj, m in zip(k, meshes)) / grid.L
    vals = amplitude * (np.sin(phase) if real else np.exp(1j * phase))
    return ScalarField(grid, vals)


def axis_sines(grid: Grid, wavenumbers, amplitudes) -> ScalarField:
    """Sum of per-axis sines; the joint maximum sits at one grid point for
    every heat time, which makes sup-norm scalings exact on sublattices."""
    meshes = grid.meshes()
    vals = np.zeros(grid.shape)
    for j, (k, a) in enumerate(zip(wavenumbers, amplitudes)):
        vals = vals + a * np.sin(2.0 * np.pi * k * meshes[j] / grid.L)
    return ScalarField(grid, vals)


def gaussian_bump(grid: Grid, sigma: float, center=None) -> ScalarField:
    """Band-limited periodized Gaussian built in the spectral domain."""
    if center is None:
        center = (grid.L / 2.0,) * grid.n
    k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    meshes = np.meshgrid(*([k] * grid.n), indexing="ij")
    xi2 = sum(m**2 for m in meshes) / grid.L**2
    phase = sum(m * c for m, c in zip(meshes, center)) / grid.L
    spec = np.exp(-2.0 * np.pi**2 * sigma**2 * xi2) * np.exp(-2j * np.pi * phase)
    spec[(0,) * grid.n] = 0.0
    return ScalarField(grid, np.fft.ifftn(spec * grid.size / grid.volume))


def taylor_green(grid: Grid, amplitude: float = 1.0) -> VectorField:
    """The vortex whose nonlinear term is a pure gradient (n = 2) or the
    classical three-dimensional variant (n = 3)."""
    meshes = grid.meshes()
    w = 2.0 * np.pi / grid.L
    if grid.n == 2:
        x, y = meshes
        return VectorField(
            [
                ScalarField(grid, amplitude * np.sin(w * x) * np.cos(w * y)),
                ScalarField(grid, -amplitude * np.cos(w * x) * np.sin(w * y)),
            ]
        )
    x, y, z = meshes
    return VectorField(
        [
            ScalarField(grid, amplitude * np.sin(w * x) * np.cos(w * y) * np.cos(w * z)),
            ScalarField(grid, -amplitude * np.cos(w * x) * np.sin(w * y) * np.cos(w * z)),
            ScalarField.zeros(grid),
        ]
    )


def solenoidal_field(
    grid: Grid, seed: int, kmax: int = 4, normalize: str = None, alpha: float = 0.5
) -> VectorField:
    """Leray projection of a random band-limited vector field.

    normalize: None, 'l2', or 'qinv' (unit component-sum heat-Carleson norm).
    """
    comps = [
        band_limited_field(grid, seed, kmax=kmax, stream=j) for j in range(grid.n)
    ]
    v = leray_project(VectorField(comps))
    if normalize == "l2":
        return v * (1.0 / v.norm_l2())
    if normalize == "qinv":
        from .norms import qinv_norm

        total = sum(qinv_norm(c, alpha).value for c in v.components)
        return v * (1.0 / total)
    return v


def generate(kind: str, grid: Grid, seed: int = 0, **params):
    """Dispatch for the corpus generator command."""
    if kind == "band-limited":
        return band_limited_field(grid, seed, kmax=int(params.get("kmax", 4)))
    if kind == "mode":
        k = params.get("k") or (1,) + (0,) * (grid.n - 1)
        return pure_mode(
            grid, k, amplitude=params.get("amplitude", 1.0), real=bool(params.get("real", True))
        )
    if kind == "taylor-green":
        return taylor_green(grid, amplitude=float(params.get("amplitude", 1.0)))
    if kind == "gaussian":
        return gaussian_bump(grid, sigma=float(params.get("sigma", grid.L / 8.0)))
    if kind == "solenoidal":
        return solenoidal_field(
            grid,
            seed,
            kmax=int(params.get("kmax", 4)),
            normalize=params.get("normalize"),
            alpha=float(params.get("alpha", 0.5)),
        )
    if kind == "axis-sines":
        ks = params.get("wavenumbers") or (1,) * grid.n
        amps = params.get("amplitudes") or (1.0,) * grid.n
        return axis_sines(grid, ks, amps)
    from .errors import UnknownKind

    raise UnknownKind(f"generator kind must be one of {GENERATOR_KINDS}, got {kind!r}")
