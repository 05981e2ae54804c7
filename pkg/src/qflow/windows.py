"""Carleson windows, dyadic window families, and singular-weight time quadrature.

A window is a (center, radius) pair with an attached sampling stride.  Window
sums run over the sublattice of spacing stride*h anchored at the center, with
cell weight (stride*h)^n, and the stride grows proportionally to the radius
(powers of two).  This keeps the cost of every window bounded and makes the
whole family transform exactly under dyadic dilation: the window (c, r, s)
for f(lam*x) and the window (lam*c, lam*r, lam*s) for f sample the same field
values with weights that match after the change of variables, so dilation
invariances hold to rounding error rather than to quadrature error.

Membership is strict: cubes are {|y - c|_inf < r}, balls are {|y - c|_2 < r},
both in periodic distance.  Strictness keeps sample sets in bijection across
dyadic rescalings (no wrap-around collisions at r = L/2).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .errors import EmptyWindowFamily
from .fields import Grid

GEOMETRIES = ("cube", "ball")


@dataclass(frozen=True)
class CarlesonWindow:
    """Grid-centered window: center grid indices, physical radius, sampling stride."""

    center: tuple
    radius: float
    stride: int = 1


def default_radii(grid: Grid) -> list:
    """Dyadic radii L*2^-j, j = 1 .. log2(N) - 2."""
    jmax = int(math.log2(grid.N)) - 2
    return [grid.L * 2.0 ** (-j) for j in range(1, jmax + 1)]


def stride_for_radius(grid: Grid, radius: float, resolution: int = 16) -> int:
    """Smallest power-of-two stride keeping <= `resolution` cells across the diameter."""
    cells = 2.0 * radius / grid.h
    s = 1
    while cells / s > resolution:
        s *= 2
    return s


@functools.lru_cache(maxsize=None)
def _window_offsets(n: int, N: int, h: float, radius: float, stride: int, geometry: str):
    """Integer offsets of the window's sample sublattice.

    Strict membership |o|*h < radius <= L/2 keeps every offset component in
    (-N/2, N/2), so offsets are already canonical periodic representatives.
    Dyadic rescalings (o, radius) -> (lam*o, lam*radius) with lam a power of
    two reproduce the same comparisons bitwise, which is what makes window
    families transform exactly under dilation.
    """
    m = min(int(math.ceil(radius / (stride * h))) * stride, N // 2)
    axis = np.arange(-m, m + 1, stride, dtype=np.int64)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=-1)
    if geometry == "cube":
        keep = np.all(np.abs(offs) * h < radius, axis=1)
    else:
        keep = np.sqrt(np.sum((offs * h) ** 2, axis=1)) < radius
    offs = offs[keep]
    offs.setflags(write=False)
    return offs


def window_offsets(grid: Grid, window: CarlesonWindow, geometry: str) -> np.ndarray:
    if geometry not in GEOMETRIES:
        raise ValueError(f"geometry must be one of {GEOMETRIES}")
    return _window_offsets(
        grid.n, grid.N, grid.h, float(window.radius), int(window.stride), geometry
    )


def window_flat_indices(grid: Grid, window: CarlesonWindow, geometry: str) -> np.ndarray:
    """Row-major flat indices of the window's samples."""
    offs = window_offsets(grid, window, geometry)
    idx = (np.asarray(window.center, dtype=np.int64) + offs) % grid.N
    flat = idx[:, 0]
    for j in range(1, grid.n):
        flat = flat * grid.N + idx[:, j]
    return flat


@dataclass(frozen=True)
class WindowFamily:
    """Finite family of windows replacing the continuum supremum."""

    grid: Grid
    geometry: str
    windows: tuple

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}")
        if not self.windows:
            raise EmptyWindowFamily("window family is empty")
        for w in self.windows:
            if not 0 < w.radius <= self.grid.L / 2 + 1e-12:
                raise ValueError(f"radius {w.radius} outside (0, L/2]")

    def __len__(self):
        return len(self.windows)

    def __iter__(self):
        return iter(self.windows)

    @classmethod
    def build(
        cls,
        grid: Grid,
        geometry: str,
        centers=None,
        radii=None,
        center_stride: int = None,
        resolution: int = 16,
    ) -> "WindowFamily":
        """Family on a center sublattice (default stride N/8) with dyadic radii."""
        if radii is None:
            radii = default_radii(grid)
        if centers is None:
            if center_stride is None:
                center_stride = max(1, grid.N // 8)
            axis = np.arange(0, grid.N, center_stride)
            centers = [
                tuple(c)
                for c in np.stack(
                    [g.ravel() for g in np.meshgrid(*([axis] * grid.n), indexing="ij")],
                    axis=-1,
                )
            ]
        windows = tuple(
            CarlesonWindow(tuple(int(x) for x in c), float(r), stride_for_radius(grid, r, resolution))
            for r in sorted(radii, reverse=True)
            for c in centers
        )
        return cls(grid, geometry, windows)

    @classmethod
    def exhaustive(cls, grid: Grid, geometry: str) -> "WindowFamily":
        """Every grid center, every radius m*h up to L/2, full resolution.

        Intended for small grids where sup-type norms are checked against
        brute-force enumeration.
        """
        centers = np.stack(
            [g.ravel() for g in np.meshgrid(*([np.arange(grid.N)] * grid.n), indexing="ij")],
            axis=-1,
        )
        windows = tuple(
            CarlesonWindow(tuple(int(x) for x in c), m * grid.h, 1)
            for m in range(1, grid.N // 2 + 1)
            for c in centers
        )
        return cls(grid, geometry, windows)

    def restrict_radius(self, r_max: float, strict: bool = True) -> "WindowFamily":
        kept = tuple(
            w
            for w in self.windows
            if (w.radius < r_max if strict else w.radius <= r_max)
        )
        if not kept:
            raise EmptyWindowFamily(f"no window with radius below {r_max}")
        return WindowFamily(self.grid, self.geometry, kept)

    def image(self, lam: int) -> "WindowFamily":
        """Exact dyadic image family: (c, r, s) -> (lam*c mod N, lam*r, lam*s).

        Window values of a functional for f(lam*x) over this family's
        preimages equal the values for f over the image windows, provided the
        image windows still fit (lam*r <= L/2; for pair-sum functionals
        2*lam*r <= L/2 so periodic distances scale exactly).
        """
        lam = int(lam)
        windows = tuple(
            CarlesonWindow(
                tuple((lam * c) % self.grid.N for c in w.center),
                lam * w.radius,
                lam * w.stride,
            )
            for w in self.windows
        )
        return WindowFamily(self.grid, self.geometry, windows)


@dataclass(frozen=True)
class TimeQuadrature:
    """Gauss-Jacobi rule for integrals with an algebraic endpoint weight at t = 0.

    rule(R, exponent) returns nodes/weights for integral_0^R g(t) t^exponent dt;
    the weight is folded into the rule, so g is never evaluated at t = 0, and
    t^exponent * (polynomial of degree <= 2*nodes - 1) integrates exactly.
    """

    nodes: int = 32

    def __post_init__(self):
        if self.nodes < 4:
            raise ValueError(f"quadrature node count must be >= 4, got {self.nodes}")

    def rule(self, R: float, exponent: float):
        if not R > 0:
            raise ValueError(f"interval length must be positive, got {R}")
        if exponent <= -1:
            raise ValueError(f"weight exponent must exceed -1, got {exponent}")
        x, w = _jacobi_rule(self.nodes, float(exponent))
        t = R * (1.0 + x) / 2.0
        weights = (R / 2.0) ** (exponent + 1.0) * w
        return t, weights


@functools.lru_cache(maxsize=None)
def _jacobi_rule(nodes: int, exponent: float):
    x, w = roots_jacobi(nodes, 0.0, exponent)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
