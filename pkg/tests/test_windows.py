import numpy as np
import pytest

from qflow.errors import EmptyWindowFamily
from qflow.fields import Grid
from qflow.windows import (
    CarlesonWindow,
    TimeQuadrature,
    WindowFamily,
    default_radii,
    stride_for_radius,
    window_flat_indices,
    window_offsets,
)


def test_default_radii_dyadic(grid2):
    radii = default_radii(grid2)  # N = 32 -> j = 1..3
    L = grid2.L
    assert radii == [L / 2, L / 4, L / 8]
    g8 = Grid(n=2, N=8, L=1.0)
    assert default_radii(g8) == [0.5]


def test_stride_grows_with_radius():
    grid = Grid(n=2, N=64, L=1.0)
    assert stride_for_radius(grid, grid.L / 2) == 4
    assert stride_for_radius(grid, grid.L / 4) == 2
    assert stride_for_radius(grid, grid.L / 8) == 1


def test_offsets_strict_membership(grid2):
    w = CarlesonWindow((0, 0), grid2.L / 8, 1)  # radius 4h
    offs = window_offsets(grid2, w, "cube")
    assert np.max(np.abs(offs)) == 3  # strict: |o| h < 4h
    ball = window_offsets(grid2, w, "ball")
    norms = np.sqrt(np.sum(offs**2, axis=1))
    assert ball.shape[0] < offs.shape[0]
    assert np.all(np.sqrt(np.sum(ball**2, axis=1)) * grid2.h < w.radius)


def test_offsets_scale_exactly_under_dyadic_dilation(grid2):
    # membership comparisons commute with power-of-two scalings bitwise
    for geometry in ("cube", "ball"):
        small = window_offsets(grid2, CarlesonWindow((0, 0), grid2.L / 8, 1), geometry)
        big = window_offsets(grid2, CarlesonWindow((0, 0), grid2.L / 4, 2), geometry)
        assert np.array_equal(big, 2 * small)


def test_flat_indices_wrap(grid2_small):
    w = CarlesonWindow((7, 0), 2 * grid2_small.h, 1)
    flat = window_flat_indices(grid2_small, w, "cube")
    idx = np.stack(np.unravel_index(flat, grid2_small.shape), axis=-1)
    assert {tuple(i) for i in idx} == {
        (a % 8, b % 8) for a in (6, 7, 8) for b in (-1, 0, 1)
    }


def test_family_build_and_image(grid2):
    fam = WindowFamily.build(grid2, "ball")
    assert len(fam) == 3 * 8 * 8  # 3 radii x (N/4)^2 centers at stride N/8 = 4
    img = fam.restrict_radius(grid2.L / 4, strict=False).image(2)
    for w in img:
        assert w.radius <= grid2.L / 2 + 1e-12
        assert w.stride in (2, 4)


def test_family_rejects_oversize_radius(grid2):
    with pytest.raises(ValueError):
        WindowFamily(grid2, "cube", (CarlesonWindow((0, 0), grid2.L, 1),))
    with pytest.raises(EmptyWindowFamily):
        WindowFamily(grid2, "cube", ())


def test_gauss_jacobi_exact_for_weighted_polynomials():
    # oracle: closed-form moments of t^b * t^p on (0, R]
    for b in (-0.7, -0.25, 0.5, 1.0):
        quad = TimeQuadrature(nodes=12)
        R = 0.37
        t, w = quad.rule(R, b)
        assert np.all((t > 0) & (t < R))
        assert np.all(w > 0)
        for p in range(0, 2 * 12 - 1):
            exact = R ** (b + p + 1) / (b + p + 1)
            assert np.sum(w * t**p) == pytest.approx(exact, rel=1e-12)


def test_gauss_jacobi_scales_exactly_dyadically():
    quad = TimeQuadrature(nodes=16)
    alpha = 0.6
    R = 0.11
    t1, w1 = quad.rule(R, -alpha)
    t2, w2 = quad.rule(4 * R, -alpha)
    assert np.allclose(t2, 4 * t1, rtol=1e-15)
    assert np.allclose(w2, 4 ** (1 - alpha) * w1, rtol=1e-14)


def test_quadrature_node_floor():
    with pytest.raises(ValueError):
        TimeQuadrature(nodes=3)
