"""Schur-kernel bounds and weighted space-time smoothing inequalities.

The kernel under test is

    K(s, t) = 1_{0 <= s <= t} (s/t)^{alpha/2} |zeta|^2 exp(-(t - s) |zeta|^2),

whose row and column integrals are uniformly bounded (row sums by
1 - exp(-t |zeta|^2), column sums by 1); the Schur test then bounds the
t^{-alpha}-weighted L^2 operator norm of the heat-Duhamel smoothing operator

    A f(t) = integral_0^t e^{(t-s) Delta} Delta f(s) ds

by an absolute constant.  maximal_regularity_check measures that constant on
stored trajectories; smoothing_inequality_check measures the companion bound
for sqrt(-Delta) e^{t Delta} applied to running time integrals, with the
window functional C(f; alpha) on the right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AlphaOutOfRange, EmptyTrajectory, TimeGridMismatch
from .norms import WindowFamily
from .spacetime import SpaceTimeField, exp_segment_integrals
from .windows import TimeQuadrature, window_flat_indices


@dataclass(frozen=True)
class SchurKernelSpec:
    """Parameters of the triangular heat kernel: smoothness alpha, |zeta| > 0."""

    alpha: float
    freq: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise AlphaOutOfRange(f"alpha must be in (0, 1), got {self.alpha}")
        if not (np.isfinite(self.freq) and self.freq > 0):
            raise ValueError(f"frequency magnitude must be finite positive, got {self.freq}")


def schur_kernel(spec: SchurKernelSpec, s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    z2 = spec.freq**2
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (s / t) ** (spec.alpha / 2.0) * z2 * np.exp(-(t - s) * z2)
    return np.where((s >= 0) & (s <= t), val, 0.0)


def schur_row_sum(spec: SchurKernelSpec, t: float, tol: float = 1e-9) -> float:
    """integral_0^t K(s, t) ds by adaptive quadrature (absolute error <= 1e-8).

    Bounded by 1 - exp(-t |zeta|^2): replacing (s/t)^{alpha/2} by its
    majorant 1 integrates the remaining factor exactly to that value.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    z2 = spec.freq**2
    # s = t u keeps the integrand's endpoint algebra independent of t
    val, err = integrate.quad(
        lambda u: t * z2 * u ** (spec.alpha / 2.0) * np.exp(-t * z2 * (1.0 - u)),
        0.0,
        1.0,
        epsabs=tol,
        epsrel=0.0,
        limit=200,
    )
    return float(val)


def schur_col_sum(spec: SchurKernelSpec, s: float, tol: float = 1e-9) -> float:
    """integral_s^inf K(s, t) dt; finite window [s, s + 40/|zeta|^2] plus a
    tail bounded by exp(-40), well under the 1e-8 error budget.  Bounded by 1.
    """
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    z2 = spec.freq**2
    hi = s + 40.0 / z2
    val, err = integrate.quad(
        lambda t: (s / t) ** (spec.alpha / 2.0) * z2 * np.exp(-(t - s) * z2),
        s,
        hi,
        epsabs=tol,
        epsrel=0.0,
        limit=200,
    )
    return float(val)


# ---------------------------------------------------------------------------
# weighted maximal-regularity measurement
# ---------------------------------------------------------------------------


def gauss_jacobi_times(T: float, alpha: float, nodes: int):
    """Time nodes and weights of the t^{-alpha} rule on (0, T]."""
    return TimeQuadrature(nodes=nodes).rule(T, -alpha)


def heat_duhamel_laplacian(traj: SpaceTimeField) -> SpaceTimeField:
    """A f(t) = integral_0^t e^{(t-s) Delta} Delta f(s) ds on the stored nodes.

    Per mode: -(2 pi)^2 |zeta|^2 integral_0^t exp(-(2 pi)^2 (t-s) |zeta|^2)
    fhat(s) ds with fhat piecewise linear between nodes (constant before the
    first node) and exact exponential integration per segment, accumulated by
    the semigroup recurrence.
    """
    if len(traj) == 0:
        raise EmptyTrajectory("empty trajectory")
    grid = traj.grid
    times = traj.times
    rad2 = grid.frequency_radius() ** 2
    c = (2.0 * np.pi) ** 2 * rad2  # heat decay rate per mode
    spec = np.fft.fftn(traj.values, axes=tuple(range(1, grid.n + 1)))
    out = np.empty_like(spec)
    # segment [0, t_0]: constant value spec[0]
    acc = exp_segment_integrals(c, 0.0, times[0], spec[0], spec[0], times[0])
    out[0] = acc
    for i in range(1, times.size):
        a, b = times[i - 1], times[i]
        damp = np.exp(-c * (b - a))
        acc = acc * damp + exp_segment_integrals(c, a, b, spec[i - 1], spec[i], b)
        out[i] = acc
    out *= -c
    phys = np.fft.ifftn(out, axes=tuple(range(1, grid.n + 1)))
    return SpaceTimeField(grid, times, phys)


def _weighted_l2_sum(values, grid, weights):
    """sum_i w_i |slice_i|_{L2}^2 with the torus L2 norm."""
    sq = np.sum(np.abs(values) ** 2, axis=tuple(range(1, values.ndim)))
    return float(np.sum(weights * sq * grid.cell_volume))


def maximal_regularity_check(traj: SpaceTimeField, alpha: float, T: float = None):
    """(lhs, rhs, ratio) of the t^{-alpha}-weighted bound for A.

    The trajectory must be stored on the Gauss-Jacobi t^{-alpha} nodes of
    (0, T]; both weighted integrals use those nodes, so the quotient is the
    measured operator constant (the Schur bound makes it <= 1 up to
    reconstruction error).
    """
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must be in (0, 1), got {alpha}")
    if len(traj) == 0:
        raise EmptyTrajectory("empty trajectory")
    if T is None:
        T = float(traj.times[-1])  # rule endpoint: largest node is interior
        # recover the horizon from the node layout
        t_probe, _ = gauss_jacobi_times(1.0, alpha, len(traj))
        T = float(traj.times[-1] / t_probe[-1])
    t, w = gauss_jacobi_times(T, alpha, len(traj))
    if not np.allclose(t, traj.times, rtol=1e-12, atol=0.0):
        raise TimeGridMismatch("trajectory is not stored on the t^{-alpha} rule nodes")
    Af = heat_duhamel_laplacian(traj)
    lhs = _weighted_l2_sum(Af.values, traj.grid, w)
    rhs = _weighted_l2_sum(traj.values, traj.grid, w)
    ratio = 0.0 if rhs == 0.0 else lhs / rhs
    return lhs, rhs, ratio


# ---------------------------------------------------------------------------
# smoothing of running time integrals against the window functional
# ---------------------------------------------------------------------------


def trajectory_carleson_functional(
    traj: SpaceTimeField,
    alpha: float,
    windows: WindowFamily = None,
    quadrature: TimeQuadrature = None,
) -> float:
    """C(f; alpha): sup over windows of r^{2 alpha - n} integral_0^{r^2}
    integral_ball |f(t, y)| t^{-alpha} dt dy, slices interpolated linearly.
    """
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must be in (0, 1), got {alpha}")
    grid = traj.grid
    if windows is None:
        radii = [r for r in _default_unit_radii(grid)]
        windows = WindowFamily.build(grid, "ball", radii=radii)
    quadrature = quadrature or TimeQuadrature()
    best = 0.0
    cache = {}
    for w in windows:
        key = (w.radius, w.stride)
        if key not in cache:
            t, wq = quadrature.rule(w.radius**2, -alpha)
            slices = np.empty((t.size, grid.size), dtype=float)
            for i, ti in enumerate(t):
                slices[i] = np.abs(traj.interpolate(ti)).ravel()
            cache[key] = (t, wq, slices)
        t, wq, slices = cache[key]
        idx = window_flat_indices(grid, w, "ball")
        cell = (w.stride * grid.h) ** grid.n
        ball_sums = np.array([np.sum(row) for row in slices[:, idx]])
        val = w.radius ** (2.0 * alpha - grid.n) * float(np.sum(wq * cell * ball_sums))
        best = max(best, val)
    return best


def _default_unit_radii(grid):
    """Dyadic radii below min(1, L/2): the functional lives on windows r < 1."""
    cap = min(1.0, grid.L / 2.0)
    radii = []
    r = cap / 2.0
    for _ in range(3):
        radii.append(r)
        r /= 2.0
    return radii


def smoothing_inequality_check(
    traj: SpaceTimeField,
    alpha: float,
    windows: WindowFamily = None,
    quadrature: TimeQuadrature = None,
):
    """(lhs, C * rhs, ratio) for trajectories on the unit time interval.

    lhs  = sum_i w_i | sqrt(-Delta) e^{t_i Delta} integral_0^{t_i} f(s) ds |_{L2}^2
    rhs  = C(f; alpha) * sum_i w_i |f(t_i)|_{L1}
    with the t^{-alpha} rule on (0, 1].  The right side carries the L1 norm:
    that makes both sides quadratic in f, so the quotient is invariant under
    scalar rescaling.  The running integral accumulates by the trapezoid rule.
    """
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must be in (0, 1), got {alpha}")
    if len(traj) == 0:
        raise EmptyTrajectory("empty trajectory")
    grid = traj.grid
    times = traj.times
    if times[-1] > 1.0 + 1e-12:
        raise TimeGridMismatch("trajectory must live on (0, 1]")
    t, w = gauss_jacobi_times(1.0, alpha, len(traj))
    if not np.allclose(t, times, rtol=1e-12, atol=0.0):
        raise TimeGridMismatch("trajectory is not stored on the t^{-alpha} rule nodes")

    spec = np.fft.fftn(traj.values, axes=tuple(range(1, grid.n + 1)))
    rad = grid.frequency_radius()
    mult = 2.0 * np.pi * rad
    # running integral of fhat by trapezoid; first segment extends f(t_0) back to 0
    running = np.empty_like(spec)
    running[0] = spec[0] * times[0]
    for i in range(1, times.size):
        running[i] = running[i - 1] + 0.5 * (times[i] - times[i - 1]) * (
            spec[i] + spec[i - 1]
        )
    sq = np.empty(times.size)
    for i, ti in enumerate(times):
        sym = mult * np.exp(-4.0 * np.pi**2 * ti * rad**2)
        sq[i] = float(np.sum(np.abs(sym * running[i]) ** 2)) / grid.size * grid.cell_volume
        # |g|_{L2}^2 = h^n sum |g(x)|^2 = h^n / N^n sum |ghat_fft|^2 (Parseval)
    lhs = float(np.sum(w * sq))
    C = trajectory_carleson_functional(traj, alpha, windows, quadrature)
    l1 = np.sum(np.abs(traj.values), axis=tuple(range(1, traj.values.ndim))) * grid.cell_volume
    rhs = float(np.sum(w * l1))
    denom = C * rhs
    ratio = 0.0 if denom == 0.0 else lhs / denom
    return lhs, denom, ratio
