import numpy as np
import pytest

from qflow.errors import TimeGridMismatch
from qflow.fields import Grid, ScalarField
from qflow.kernels import (
    SchurKernelSpec,
    gauss_jacobi_times,
    heat_duhamel_laplacian,
    maximal_regularity_check,
    schur_col_sum,
    schur_kernel,
    schur_row_sum,
    smoothing_inequality_check,
    trajectory_carleson_functional,
)
from qflow.spacetime import SpaceTimeField

from conftest import band_limited_field, make_rng


def random_trajectory(grid, times, rng, kmax=4):
    """Band-limited slices with smooth random time profiles."""
    base = [band_limited_field(grid, rng, kmax=kmax) for _ in range(3)]
    coeffs = rng.uniform(0.5, 1.5, size=(3,))
    rates = rng.uniform(0.0, 3.0, size=(3,))
    vals = np.zeros((times.size,) + grid.shape, dtype=complex)
    for c, r, b in zip(coeffs, rates, base):
        vals += c * np.exp(-r * times)[:, None, None] * b.values[None]
    return SpaceTimeField(grid, times, vals)


def bump_trajectory(grid, times, center, width, rng):
    """Nonnegative localized bump with a smooth time profile."""
    meshes = grid.meshes()
    d2 = sum(
        (np.minimum(np.abs(m - c), grid.L - np.abs(m - c))) ** 2
        for m, c in zip(meshes, center)
    )
    bump = np.exp(-d2 / (2.0 * width**2))
    profile = 1.0 + 0.5 * np.sin(2 * np.pi * rng.random() + 3.0 * times)
    return SpaceTimeField(grid, times, profile[:, None, None] * bump[None])


# ---------------------------------------------------------------------------
# Schur kernel marginals
# ---------------------------------------------------------------------------


def test_kernel_support_and_sign():
    spec = SchurKernelSpec(alpha=0.5, freq=2.0)
    assert schur_kernel(spec, 0.5, 1.0) > 0
    assert schur_kernel(spec, 1.5, 1.0) == 0.0  # s > t
    assert schur_kernel(spec, -0.1, 1.0) == 0.0


def test_row_sums_bounded_over_grid():
    alphas = np.linspace(0.05, 0.95, 10)
    freqs = np.geomspace(0.1, 30.0, 10)
    ts = np.geomspace(1e-3, 30.0, 10)
    for a in alphas:
        for z in freqs:
            spec = SchurKernelSpec(alpha=float(a), freq=float(z))
            for t in ts:
                bound = -np.expm1(-t * z * z)
                assert schur_row_sum(spec, float(t)) <= bound + 1e-8


def test_col_sums_bounded_over_grid():
    alphas = np.linspace(0.05, 0.95, 10)
    freqs = np.geomspace(0.1, 30.0, 10)
    ss = np.geomspace(1e-3, 30.0, 10)
    for a in alphas:
        for z in freqs:
            spec = SchurKernelSpec(alpha=float(a), freq=float(z))
            for s in ss:
                assert schur_col_sum(spec, float(s)) <= 1.0 + 1e-8


def test_row_sum_majorant_without_power_factor():
    # replacing (s/t)^{alpha/2} by 1 integrates exactly to 1 - exp(-t z^2)
    z, t = 1.7, 0.8
    from scipy import integrate

    val, _ = integrate.quad(lambda s: z * z * np.exp(-(t - s) * z * z), 0, t)
    assert val == pytest.approx(-np.expm1(-t * z * z), rel=1e-10)


def test_row_sum_vanishes_as_t_to_zero():
    spec = SchurKernelSpec(alpha=0.5, freq=2.0)
    assert schur_row_sum(spec, 1e-8) < 1e-7


def test_col_sum_frequency_rescaling():
    # substitution oracle: (s, t) -> (s / z^2, t / z^2) reduces to z = 1
    for a in (0.25, 0.6):
        for z in (0.5, 3.0):
            for s in (0.2, 1.1):
                v1 = schur_col_sum(SchurKernelSpec(alpha=a, freq=z), s)
                v2 = schur_col_sum(SchurKernelSpec(alpha=a, freq=1.0), s * z * z)
                assert v1 == pytest.approx(v2, abs=1e-9)


# ---------------------------------------------------------------------------
# weighted maximal regularity
# ---------------------------------------------------------------------------


def test_duhamel_closed_form_for_time_independent(grid2):
    f = band_limited_field(grid2, make_rng(80), kmax=4)
    T = 0.7
    t, _ = gauss_jacobi_times(T, 0.5, 24)
    traj = SpaceTimeField(grid2, t, np.broadcast_to(f.values, (t.size,) + grid2.shape))
    Af = heat_duhamel_laplacian(traj)
    F = np.fft.fftn(f.values)
    rad2 = grid2.frequency_radius() ** 2
    for i in (0, 10, 23):
        expect = np.fft.ifftn(-(-np.expm1(-((2 * np.pi) ** 2) * t[i] * rad2)) * F)
        scale = np.max(np.abs(expect)) + 1e-300
        assert np.max(np.abs(Af.values[i] - expect)) / scale < 1e-8


def test_zero_trajectory_reports_zero(grid2):
    t, _ = gauss_jacobi_times(0.5, 0.5, 8)
    traj = SpaceTimeField(grid2, t, np.zeros((t.size,) + grid2.shape))
    lhs, rhs, ratio = maximal_regularity_check(traj, 0.5)
    assert (lhs, rhs, ratio) == (0.0, 0.0, 0.0)


def test_maximal_regularity_corpus(grid2):
    rng = make_rng(81)
    for alpha in (0.25, 0.5, 0.75):
        t, _ = gauss_jacobi_times(1.0, alpha, 32)
        for _ in range(8):
            traj = random_trajectory(grid2, t, rng)
            lhs, rhs, ratio = maximal_regularity_check(traj, alpha)
            assert ratio <= 10.0


def test_maximal_regularity_scale_invariance(grid2):
    rng = make_rng(82)
    alpha = 0.5
    t, _ = gauss_jacobi_times(1.0, alpha, 16)
    traj = random_trajectory(grid2, t, rng)
    _, _, r1 = maximal_regularity_check(traj, alpha)
    doubled = SpaceTimeField(grid2, t, 2.0 * traj.values)
    _, _, r2 = maximal_regularity_check(doubled, alpha)
    assert r2 == pytest.approx(r1, rel=1e-12)
    tripled = SpaceTimeField(grid2, t, 3.0 * traj.values)
    _, _, r3 = maximal_regularity_check(tripled, alpha)
    assert r3 == pytest.approx(r1, rel=1e-12)


def test_maximal_regularity_rejects_wrong_nodes(grid2):
    times = np.linspace(0.01, 1.0, 16)
    traj = SpaceTimeField(grid2, times, np.zeros((16,) + grid2.shape))
    with pytest.raises(TimeGridMismatch):
        maximal_regularity_check(traj, 0.5)


# ---------------------------------------------------------------------------
# smoothing of running integrals
# ---------------------------------------------------------------------------


@pytest.fixture
def grid_unit():
    return Grid(n=2, N=32, L=4.0)


def test_smoothing_zero_trajectory(grid_unit):
    t, _ = gauss_jacobi_times(1.0, 0.5, 16)
    traj = SpaceTimeField(grid_unit, t, np.zeros((t.size,) + grid_unit.shape))
    assert smoothing_inequality_check(traj, 0.5) == (0.0, 0.0, 0.0)


def test_smoothing_corpus_bound(grid_unit):
    rng = make_rng(83)
    t, _ = gauss_jacobi_times(1.0, 0.5, 24)
    ratios = []
    for _ in range(50):
        center = rng.uniform(0, grid_unit.L, size=2)
        width = rng.uniform(0.15, 0.5)
        traj = bump_trajectory(grid_unit, t, center, width, rng)
        lhs, crhs, ratio = smoothing_inequality_check(traj, 0.5)
        ratios.append(ratio)
    assert max(ratios) <= 10.0


def test_smoothing_homogeneity(grid_unit):
    # doubling f doubles C and doubles the L1 side: the quotient is invariant
    rng = make_rng(84)
    t, _ = gauss_jacobi_times(1.0, 0.4, 16)
    traj = bump_trajectory(grid_unit, t, (1.0, 2.0), 0.3, rng)
    lhs1, crhs1, r1 = smoothing_inequality_check(traj, 0.4)
    doubled = SpaceTimeField(grid_unit, t, 2.0 * traj.values)
    lhs2, crhs2, r2 = smoothing_inequality_check(doubled, 0.4)
    assert lhs2 == pytest.approx(4.0 * lhs1, rel=1e-12)
    assert crhs2 == pytest.approx(4.0 * crhs1, rel=1e-12)
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_trajectory_carleson_positive_on_bumps(grid_unit):
    rng = make_rng(85)
    t, _ = gauss_jacobi_times(1.0, 0.5, 16)
    traj = bump_trajectory(grid_unit, t, (2.0, 2.0), 0.3, rng)
    assert trajectory_carleson_functional(traj, 0.5) > 0
