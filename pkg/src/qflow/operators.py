"""Fourier-multiplier operators: fractional Laplacian powers, heat and Poisson
semigroups, Riesz transforms, the Leray (Helmholtz-Weyl) projection, and
user-supplied symbols.

Symbols are functions of the continuous frequency xi = k/L:

    fractional-laplacian(beta)    (2*pi*|xi|)^beta
    heat(t)                       exp(-4*pi^2*t*|xi|^2)
    poisson(t)                    exp(-2*pi*t*|xi|)
    poisson-t-derivative(t)       -2*pi*|xi|*exp(-2*pi*t*|xi|)
    riesz(j)                      i*xi_j/|xi|

The zero-mode policy is explicit per symbol: pass (heat, poisson, beta = 0),
zero (beta > 0, poisson-t-derivative), or singular.  Singular symbols demand a
zero-mean input and zero the mode; otherwise ZeroModeSingular is raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ZeroModeSingular
from .fields import Grid, ScalarField, VectorField
from .spacetime import SpaceTimeField

_KINDS = (
    "fractional-laplacian",
    "heat",
    "poisson",
    "poisson-t-derivative",
    "riesz",
    "custom",
)


@dataclass(frozen=True)
class MultiplierSpec:
    kind: str
    beta: Optional[float] = None
    t: Optional[float] = None
    axis: Optional[int] = None
    symbol: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if self.kind in ("heat", "poisson", "poisson-t-derivative"):
            if self.t is None or self.t < 0:
                raise ValueError(f"{self.kind} requires t >= 0, got {self.t}")
        if self.kind == "fractional-laplacian" and self.beta is None:
            raise ValueError("fractional-laplacian requires beta")
        if self.kind == "riesz" and (self.axis is None or self.axis < 1):
            raise ValueError("riesz requires an axis index j >= 1")
        if self.kind == "custom" and self.symbol is None:
            raise ValueError("custom requires a symbol function")

    @classmethod
    def fractional_laplacian(cls, beta: float) -> "MultiplierSpec":
        return cls("fractional-laplacian", beta=beta)

    @classmethod
    def heat(cls, t: float) -> "MultiplierSpec":
        return cls("heat", t=t)

    @classmethod
    def poisson(cls, t: float) -> "MultiplierSpec":
        return cls("poisson", t=t)

    @classmethod
    def poisson_t_derivative(cls, t: float) -> "MultiplierSpec":
        return cls("poisson-t-derivative", t=t)

    @classmethod
    def riesz(cls, j: int) -> "MultiplierSpec":
        return cls("riesz", axis=j)

    @classmethod
    def custom(cls, symbol: Callable) -> "MultiplierSpec":
        return cls("custom", symbol=symbol)


def _zero_mean_or_raise(F: np.ndarray, kind: str, grid: Grid) -> None:
    scale = float(np.sqrt(np.sum(np.abs(F) ** 2) / grid.volume))
    zero_mode = abs(F[(0,) * grid.n])
    if zero_mode > 1e-12 * scale:
        raise ZeroModeSingular(
            f"{kind} is singular at xi=0; input has nonzero mean "
            f"({zero_mode:.3e} vs L2 scale {scale:.3e})"
        )


def _symbol_array(grid: Grid, spec: MultiplierSpec, F: np.ndarray) -> np.ndarray:
    rad = grid.frequency_radius()
    origin = (0,) * grid.n
    if spec.kind == "heat":
        return np.exp(-4.0 * np.pi**2 * spec.t * rad**2)
    if spec.kind == "poisson":
        return np.exp(-2.0 * np.pi * spec.t * rad)
    if spec.kind == "poisson-t-derivative":
        return -2.0 * np.pi * rad * np.exp(-2.0 * np.pi * spec.t * rad)
    if spec.kind == "fractional-laplacian":
        beta = spec.beta
        if beta == 0:
            return np.ones(grid.shape)
        if beta < 0:
            _zero_mean_or_raise(F, "fractional-laplacian with beta < 0", grid)
        safe = rad.copy()
        safe[origin] = 1.0
        sym = (2.0 * np.pi * safe) ** beta
        sym[origin] = 0.0
        return sym
    if spec.kind == "riesz":
        _zero_mean_or_raise(F, "riesz transform", grid)
        xi_j = grid.frequencies()[spec.axis - 1]
        safe = rad.copy()
        safe[origin] = 1.0
        sym = 1j * xi_j / safe
        sym[origin] = 0.0
        return sym
    if spec.kind == "custom":
        sym = np.asarray(spec.symbol(*grid.frequencies()), dtype=np.complex128)
        if not np.isfinite(sym[origin]):
            _zero_mean_or_raise(F, "custom symbol singular at xi=0", grid)
            sym = sym.copy()
            sym[origin] = 0.0
        return sym
    raise AssertionError(spec.kind)


def apply_multiplier(f: ScalarField, spec: MultiplierSpec) -> ScalarField:
    """Coefficient-wise product of fhat with the symbol of spec."""
    F = np.fft.fftn(f.values)
    sym = _symbol_array(f.grid, spec, F)
    return ScalarField(f.grid, np.fft.ifftn(sym * F))


def heat_semigroup(f: ScalarField, t: float) -> ScalarField:
    return apply_multiplier(f, MultiplierSpec.heat(t))


def poisson_semigroup(f: ScalarField, t: float) -> ScalarField:
    return apply_multiplier(f, MultiplierSpec.poisson(t))


def poisson_time_derivative(f: ScalarField, t: float) -> ScalarField:
    """d/dt of the Poisson extension at height t, as its own multiplier."""
    return apply_multiplier(f, MultiplierSpec.poisson_t_derivative(t))


def riesz_transform(f: ScalarField, j: int) -> ScalarField:
    return apply_multiplier(f, MultiplierSpec.riesz(j))


def fractional_laplacian(f: ScalarField, beta: float) -> ScalarField:
    return apply_multiplier(f, MultiplierSpec.fractional_laplacian(beta))


def leray_project(v: VectorField) -> VectorField:
    """Project onto divergence-free fields; per-mode symbol I - xi xi^T/|xi|^2.

    The zero mode passes through unchanged (constants are divergence-free).
    """
    grid = v.grid
    xi = grid.frequencies()
    rad2 = grid.frequency_radius() ** 2
    safe = rad2.copy()
    safe[(0,) * grid.n] = 1.0
    F = [np.fft.fftn(c.values) for c in v.components]
    xi_dot_F = sum(xi[j] * F[j] for j in range(grid.n))
    out = []
    for j in range(grid.n):
        proj = F[j] - xi[j] * xi_dot_F / safe
        # zero mode: xi_j = 0 so the correction already vanishes there
        out.append(ScalarField(grid, np.fft.ifftn(proj)))
    return VectorField(out)


def heat_extension(f: ScalarField, times) -> SpaceTimeField:
    """Heat trajectory e^{t Delta} f sampled at the given times."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-D sequence")
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing and >= 0")
    F = np.fft.fftn(f.values)
    rad2 = f.grid.frequency_radius() ** 2
    slices = np.empty((times.size,) + f.grid.shape, dtype=np.complex128)
    for i, t in enumerate(times):
        slices[i] = np.fft.ifftn(np.exp(-4.0 * np.pi**2 * t * rad2) * F)
    return SpaceTimeField(f.grid, times, slices)
