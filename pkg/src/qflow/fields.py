"""Periodic grids, complex-valued fields, and exact spectral calculus on the torus.

All functionals in the package are discretized on the uniform grid of the
torus [0, L)^n.  The Fourier convention is

    fhat(k) = h^n * sum_x f(x) exp(-2*pi*i k.x / L),     k in {-N/2, .., N/2-1}^n,

with continuous frequency xi = k / L, so spectral multipliers written in terms
of (2*pi*|xi|) act exactly on grid data.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, L)^n, N samples per axis, spacing h = L/N."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"spatial dimension must be 2 or 3, got {self.n}")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"period length must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.N) * self.h

    def meshes(self):
        """Coordinate meshes x_j, indexed [axis][i0, i1, ...]."""
        return _coordinate_meshes(self)

    def wavenumbers(self):
        """Integer wavenumber meshes in FFT layout (0..N/2-1, -N/2..-1)."""
        return _wavenumber_meshes(self)

    def frequencies(self):
        """Continuous frequency meshes xi = k/L in FFT layout."""
        return _frequency_meshes(self)

    def frequency_radius(self):
        """|xi| mesh in FFT layout."""
        return _frequency_radius(self)


@functools.lru_cache(maxsize=None)
def _axis_wavenumbers(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, d=1.0 / N)


@functools.lru_cache(maxsize=None)
def _coordinate_meshes(grid: Grid):
    axes = [grid.axis_coordinates()] * grid.n
    return np.meshgrid(*axes, indexing="ij")


@functools.lru_cache(maxsize=None)
def _wavenumber_meshes(grid: Grid):
    k = _axis_wavenumbers(grid.N)
    return np.meshgrid(*([k] * grid.n), indexing="ij")


@functools.lru_cache(maxsize=None)
def _frequency_meshes(grid: Grid):
    return tuple(k / grid.L for k in _wavenumber_meshes(grid))


@functools.lru_cache(maxsize=None)
def _frequency_radius(grid: Grid):
    xi = _frequency_meshes(grid)
    return np.sqrt(sum(x**2 for x in xi))


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=np.complex128)
    out.setflags(write=False)
    return out


class ScalarField:
    """Complex samples on a Grid; immutable after construction."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _freeze(values))

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def constant(cls, grid: Grid, c) -> "ScalarField":
        return cls(grid, np.full(grid.shape, c, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        """Sample fn(*coordinate meshes) on the grid."""
        return cls(grid, fn(*grid.meshes()))

    @property
    def is_real(self) -> bool:
        scale = float(np.max(np.abs(self.values))) or 1.0
        return float(np.max(np.abs(self.values.imag))) <= 1e-12 * scale

    def real_part(self) -> np.ndarray:
        return self.values.real

    def mean(self) -> complex:
        return complex(np.mean(self.values))

    def norm_l2(self) -> float:
        """Torus L2 norm, (h^n sum |f|^2)^{1/2}."""
        return float(np.sqrt(self.grid.cell_volume * np.sum(np.abs(self.values) ** 2)))

    def norm_l1(self) -> float:
        return float(self.grid.cell_volume * np.sum(np.abs(self.values)))

    def norm_linf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        self._check(other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.values * other.values)
        return ScalarField(self.grid, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatch(f"{other.grid} != {self.grid}")


class VectorField:
    """n ScalarField components on one shared Grid."""

    __slots__ = ("grid", "components")

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("vector field needs at least one component")
        grid = components[0].grid
        if len(components) != grid.n:
            raise ValueError(f"expected {grid.n} components, got {len(components)}")
        for c in components[1:]:
            if c.grid != grid:
                raise GridMismatch("vector components live on different grids")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("VectorField is immutable")

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls([ScalarField.zeros(grid) for _ in range(grid.n)])

    def __getitem__(self, j) -> ScalarField:
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other):
        return VectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return VectorField([a - b for a, b in zip(self.components, other.components)])

    def __mul__(self, scalar):
        return VectorField([c * scalar for c in self.components])

    __rmul__ = __mul__

    def norm_l2(self) -> float:
        return float(np.sqrt(sum(c.norm_l2() ** 2 for c in self.components)))

    def norm_linf(self) -> float:
        return max(c.norm_linf() for c in self.components)

    def stack(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])


class SpectralField:
    """Fourier coefficients of a ScalarField, FFT layout, weight h^n included."""

    __slots__ = ("grid", "coefficients")

    def __init__(self, grid: Grid, coefficients):
        coefficients = np.asarray(coefficients)
        if coefficients.shape != grid.shape:
            raise ValueError(
                f"coefficients shape {coefficients.shape} != grid shape {grid.shape}"
            )
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "coefficients", _freeze(coefficients))

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    def coefficient(self, k) -> complex:
        """Coefficient at integer wavevector k (components may be negative)."""
        idx = tuple(int(kj) % self.grid.N for kj in k)
        return complex(self.coefficients[idx])

    def norm_l2(self) -> float:
        """Parseval partner of ScalarField.norm_l2: (sum |fhat|^2 / L^n)^{1/2}."""
        return float(
            np.sqrt(np.sum(np.abs(self.coefficients) ** 2) / self.grid.volume)
        )


def forward_transform(f: ScalarField) -> SpectralField:
    """Discrete Fourier transform with weight h^n (trapezoid rule on the torus)."""
    return SpectralField(f.grid, np.fft.fftn(f.values) * f.grid.cell_volume)


def inverse_transform(F: SpectralField) -> ScalarField:
    """Exact inverse of forward_transform."""
    return ScalarField(F.grid, np.fft.ifftn(F.coefficients) / F.grid.cell_volume)


def gradient(f: ScalarField) -> VectorField:
    """Spectral gradient; per-axis multiplier 2*pi*i*xi_j."""
    F = np.fft.fftn(f.values)
    xi = f.grid.frequencies()
    comps = [
        ScalarField(f.grid, np.fft.ifftn(2j * np.pi * xi[j] * F))
        for j in range(f.grid.n)
    ]
    return VectorField(comps)


def divergence(v: VectorField) -> ScalarField:
    """Spectral divergence; composes with gradient to the exact Laplacian."""
    xi = v.grid.frequencies()
    acc = np.zeros(v.grid.shape, dtype=np.complex128)
    for j, c in enumerate(v.components):
        acc += 2j * np.pi * xi[j] * np.fft.fftn(c.values)
    return ScalarField(v.grid, np.fft.ifftn(acc))


def laplacian(f: ScalarField) -> ScalarField:
    """Spectral Laplacian, multiplier -4*pi^2*|xi|^2."""
    F = np.fft.fftn(f.values)
    sym = -4.0 * np.pi**2 * f.grid.frequency_radius() ** 2
    return ScalarField(f.grid, np.fft.ifftn(sym * F))


def dilate(f: ScalarField, lam: int) -> ScalarField:
    """Exact subsampled composition g(x) = f(lam*x mod L) on the same grid.

    Band-limited inputs with max |k| < N/(2*lam) lose no information: mode k
    transplants to mode lam*k.
    """
    if int(lam) != lam or lam < 1:
        raise ValueError(f"dilation factor must be a positive integer, got {lam}")
    lam = int(lam)
    idx = (lam * np.arange(f.grid.N)) % f.grid.N
    values = f.values[np.ix_(*([idx] * f.grid.n))]
    return ScalarField(f.grid, values)


def dilate_vector(v: VectorField, lam: int) -> VectorField:
    return VectorField([dilate(c, lam) for c in v.components])
