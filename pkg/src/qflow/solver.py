"""Global-in-window Picard iteration for the mild Navier-Stokes equation.

The iteration acts on whole space-time trajectories,

    u^{k+1} = e^{t Delta} a - B(u^k, u^k),
    B(u, v)(t) = integral_0^t e^{(t-s) Delta} P div(u (x) v) ds,

with the Leray projection P applied before propagation, so every stored
slice is divergence-free to rounding.  Iterating trajectories (rather than
stepping in time) makes the recorded contraction ratios precisely the
quantity the small-data argument controls.  Viscosity is fixed to one; other
values are reachable by the parabolic rescaling and are not modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatch,
    NumericalBlowup,
    TimeGridMismatch,
)
from .fields import Grid, ScalarField, VectorField, dilate_vector, divergence
from .norms import qinv_norm, x_norm, xnorm_radii
from .spacetime import SpaceTimeField, exp_segment_integrals
from .windows import TimeQuadrature, WindowFamily


@dataclass
class SolverConfig:
    grid: Grid
    alpha: float = 0.5
    T: float = 0.1
    steps: int = 128  # uniform time intervals; slices at m T / steps
    tolerance: float = 1e-10  # Picard stop on the trajectory-norm of differences
    max_iterations: int = 30
    dealias: bool = True  # 2/3-rule truncation of the quadratic term
    quadrature_nodes: int = 32
    xnorm_levels: int = 4
    center_stride: int = None  # window centers for trajectory-norm diagnostics

    def __post_init__(self):
        if self.steps < 8:
            raise ValueError(f"need at least 8 time steps, got {self.steps}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.T > 0:
            raise ValueError(f"horizon must be positive, got {self.T}")

    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * (self.T / self.steps)


class Trajectory:
    """VectorField slices at t_m = m T / M; slice 0 is the initial data."""

    __slots__ = ("grid", "times", "values")

    def __init__(self, grid: Grid, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (times.size, grid.n) + grid.shape:
            raise ValueError(
                f"values shape {values.shape} != {(times.size, grid.n) + grid.shape}"
            )
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("Trajectory is immutable")

    def __len__(self):
        return self.times.size

    def slice(self, m: int) -> VectorField:
        return VectorField(
            [ScalarField(self.grid, self.values[m, j]) for j in range(self.grid.n)]
        )

    def component(self, j: int) -> SpaceTimeField:
        return SpaceTimeField(self.grid, self.times, self.values[:, j])

    def check_compatible(self, other: "Trajectory"):
        if self.grid != other.grid:
            raise GridMismatch("trajectories on different grids")
        if not np.array_equal(self.times, other.times):
            raise TimeGridMismatch("trajectories on different time grids")


@dataclass
class SolverDiagnostics:
    alpha: float
    T: float
    steps: int
    admission_norm: float
    iterate_norms: list = field(default_factory=list)
    difference_norms: list = field(default_factory=list)
    contraction_ratios: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    residual: float = float("nan")
    energies: list = field(default_factory=list)
    energy_monotone: bool = False
    max_divergence: float = float("nan")

    def json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "T": self.T,
            "steps": self.steps,
            "admission_norm": self.admission_norm,
            "iterate_norms": list(self.iterate_norms),
            "difference_norms": list(self.difference_norms),
            "contraction_ratios": list(self.contraction_ratios),
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "energies": list(self.energies),
            "energy_monotone": self.energy_monotone,
            "max_divergence": self.max_divergence,
        }


# ---------------------------------------------------------------------------
# trajectory-space operators
# ---------------------------------------------------------------------------


def heat_flow(a: VectorField, config: SolverConfig) -> Trajectory:
    """Component-wise heat semigroup of the initial data on the time grid."""
    grid = a.grid
    times = config.times()
    rad2 = grid.frequency_radius() ** 2
    spec = np.stack([np.fft.fftn(c.values) for c in a.components])
    out = np.empty((times.size, grid.n) + grid.shape, dtype=np.complex128)
    for m, t in enumerate(times):
        damp = np.exp(-4.0 * np.pi**2 * t * rad2)
        for j in range(grid.n):
            out[m, j] = np.fft.ifftn(damp * spec[j])
    return Trajectory(grid, times, out)


def _dealias_mask(grid: Grid):
    k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    meshes = np.meshgrid(*([k] * grid.n), indexing="ij")
    keep = np.ones(grid.shape, dtype=bool)
    cut = grid.N // 3
    for m in meshes:
        keep &= np.abs(m) <= cut
    return keep


def _projected_nonlinearity(u_slice, v_slice, grid, mask):
    """P div(u (x) v) of one slice pair, spectral output (n, *shape).

    Products in physical space, derivative and projection in spectral space,
    2/3-rule truncation of the product spectra when mask is given.
    """
    n = grid.n
    xi = grid.frequencies()
    rad2 = grid.frequency_radius() ** 2
    safe = rad2.copy()
    safe[(0,) * n] = 1.0
    div_hat = np.zeros((n,) + grid.shape, dtype=np.complex128)
    for j in range(n):
        for i in range(n):
            prod = np.fft.fftn(u_slice[i] * v_slice[j])
            if mask is not None:
                prod = prod * mask
            div_hat[j] += 2j * np.pi * xi[i] * prod
    xi_dot = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(n):
        xi_dot += xi[j] * div_hat[j]
    for j in range(n):
        div_hat[j] -= xi[j] * xi_dot / safe
    return div_hat


def bilinear_term(u: Trajectory, v: Trajectory, config: SolverConfig) -> Trajectory:
    """B(u, v): Duhamel integral of the projected nonlinearity.

    The integrand is reconstructed piecewise-linearly in s between slices and
    each segment integrates the heat factor exactly, accumulated by the
    semigroup recurrence, so the rule is second order on smooth flows.
    """
    u.check_compatible(v)
    grid = u.grid
    times = u.times
    mask = _dealias_mask(grid) if config.dealias else None
    w_hat = np.empty((times.size, grid.n) + grid.shape, dtype=np.complex128)
    for m in range(times.size):
        w_hat[m] = _projected_nonlinearity(u.values[m], v.values[m], grid, mask)

    rad2 = grid.frequency_radius() ** 2
    c = 4.0 * np.pi**2 * rad2
    dt = times[1] - times[0]
    damp = np.exp(-c * dt)
    out = np.zeros_like(w_hat)
    acc = np.zeros((grid.n,) + grid.shape, dtype=np.complex128)
    for m in range(1, times.size):
        seg = exp_segment_integrals(c, times[m - 1], times[m], w_hat[m - 1], w_hat[m], times[m])
        acc = acc * damp + seg
        out[m] = acc
    phys = np.fft.ifftn(out, axes=tuple(range(2, 2 + grid.n)))
    return Trajectory(grid, times, phys)


def trajectory_x_norm(traj: Trajectory, config: SolverConfig) -> float:
    """Sum of the component trajectory norms (the product-space norm)."""
    radii = xnorm_radii(traj.grid, config.T, config.xnorm_levels)
    windows = (
        WindowFamily.build(
            traj.grid, "ball", radii=radii, center_stride=config.center_stride
        )
        if radii
        else None
    )
    quad = TimeQuadrature(nodes=config.quadrature_nodes)
    return sum(
        x_norm(traj.component(j), config.alpha, T=config.T, windows=windows, quadrature=quad)
        for j in range(traj.grid.n)
    )


def _difference(a: Trajectory, b: Trajectory) -> Trajectory:
    return Trajectory(a.grid, a.times, a.values - b.values)


def _max_divergence(traj: Trajectory) -> float:
    worst = 0.0
    scale = max(float(np.max(np.abs(traj.values))), 1e-300)
    for m in range(len(traj)):
        d = divergence(traj.slice(m))
        worst = max(worst, d.norm_linf())
    return worst / scale


# ---------------------------------------------------------------------------
# admission and the Picard loop
# ---------------------------------------------------------------------------


def admission_windows(grid: Grid, T: float = None) -> WindowFamily:
    """Ball windows with dyadic radii below the horizon (radius < T)."""
    cap = grid.L / 2.0 if T is None else min(T, grid.L / 2.0)
    radii = [cap / 2.0**j for j in range(1, 5)]
    return WindowFamily.build(grid, "ball", radii=radii)


def admission_check(a: VectorField, alpha: float, T: float = None, eps: float = None):
    """Component-sum heat-Carleson norm of the data, divergence residual, and
    the comparison against the requested smallness threshold."""
    windows = admission_windows(a.grid, T)
    norm = sum(
        qinv_norm(c, alpha, T=None, windows=windows).value for c in a.components
    )
    scale = a.norm_l2()
    div_residual = divergence(a).norm_l2() / scale if scale > 0 else 0.0
    report = {
        "admission_norm": norm,
        "divergence_residual": div_residual,
        "T": T,
        "alpha": alpha,
    }
    if eps is not None:
        report["epsilon"] = eps
        report["admitted"] = bool(norm <= eps and div_residual <= 1e-8)
    return report


def picard_solve(a: VectorField, config: SolverConfig):
    """Iterate the mild map to a fixed point; returns (Trajectory, diagnostics).

    The solver runs regardless of the admission outcome and records it.
    Divergence of the data is not repaired here; project beforehand if needed.
    """
    grid = a.grid
    admission = admission_check(a, config.alpha, config.T)
    diags = SolverDiagnostics(
        alpha=config.alpha,
        T=config.T,
        steps=config.steps,
        admission_norm=admission["admission_norm"],
    )
    u0 = heat_flow(a, config)
    u = u0
    diags.iterate_norms.append(trajectory_x_norm(u, config))
    prev_diff = None
    converged = False
    iterations = 0
    for _ in range(config.max_iterations):
        iterations += 1
        correction = bilinear_term(u, u, config)
        if not np.all(np.isfinite(correction.values)):
            raise NumericalBlowup(f"non-finite slice at iteration {iterations}")
        u_next = Trajectory(grid, u.times, u0.values - correction.values)
        diff = trajectory_x_norm(_difference(u_next, u), config)
        diags.difference_norms.append(diff)
        if prev_diff is not None and prev_diff > 0:
            diags.contraction_ratios.append(diff / prev_diff)
        prev_diff = diff
        u = u_next
        diags.iterate_norms.append(trajectory_x_norm(u, config))
        if diff < config.tolerance:
            converged = True
            break
    diags.iterations = iterations
    diags.converged = converged
    final_correction = bilinear_term(u, u, config)
    residual_traj = Trajectory(grid, u.times, u.values - (u0.values - final_correction.values))
    diags.residual = trajectory_x_norm(residual_traj, config)
    energies = [
        math.sqrt(sum(c.norm_l2() ** 2 for c in u.slice(m))) for m in range(len(u))
    ]
    diags.energies = energies
    slack = 1e-8 * (energies[0] if energies[0] > 0 else 1.0)
    diags.energy_monotone = all(
        b <= a_ + slack for a_, b in zip(energies, energies[1:])
    )
    diags.max_divergence = _max_divergence(u)
    return u, diags


def contraction_sweep(a_unit: VectorField, amplitudes, config: SolverConfig):
    """Run the Picard solver across amplitudes of a normalized profile.

    a_unit should be divergence-free with unit admission norm; each row
    records amplitude, admission norm, convergence, iterations, final
    contraction ratio, and the final trajectory norm.
    """
    rows = []
    for amp in amplitudes:
        a = a_unit * float(amp)
        try:
            u, diags = picard_solve(a, config)
            final_ratio = diags.contraction_ratios[-1] if diags.contraction_ratios else 0.0
            rows.append(
                {
                    "amplitude": float(amp),
                    "admission_norm": diags.admission_norm,
                    "converged": diags.converged,
                    "iterations": diags.iterations,
                    "final_ratio": final_ratio,
                    "final_xnorm": diags.iterate_norms[-1],
                }
            )
        except NumericalBlowup:
            rows.append(
                {
                    "amplitude": float(amp),
                    "admission_norm": float("nan"),
                    "converged": False,
                    "iterations": 0,
                    "final_ratio": float("inf"),
                    "final_xnorm": float("inf"),
                }
            )
    return rows


def scaling_experiment(a: VectorField, lam: int, config: SolverConfig):
    """Solve with the data and its parabolic rescaling; compare slice-wise.

    Run one solves on [0, T], run two solves lam * a(lam x) on [0, T/lam^2]
    with the same step count, so node m of run two corresponds exactly to
    node m of run one under (t, x) -> (lam^2 t, lam x).
    """
    lam = int(lam)
    if lam < 1 or (lam & (lam - 1)) != 0:
        raise ValueError(f"dilation factor must be a dyadic integer, got {lam}")
    grid = a.grid
    spec = np.stack([np.abs(np.fft.fftn(c.values)) for c in a.components])
    k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    meshes = np.meshgrid(*([k] * grid.n), indexing="ij")
    kinf = np.max(np.abs(np.stack(meshes)), axis=0)
    active = spec.max(axis=0) > 1e-13 * spec.max()
    kmax = int(np.max(kinf[active])) if np.any(active) else 0
    if config.dealias and 2 * lam * kmax > grid.N // 3:
        raise ValueError(
            f"band limit {kmax} leaves no headroom for dilation by {lam} "
            f"(need 2*lam*kmax <= N/3)"
        )
    u1, d1 = picard_solve(a, config)
    import dataclasses

    config2 = dataclasses.replace(config, T=config.T / lam**2)
    a2 = dilate_vector(a, lam) * float(lam)
    u2, d2 = picard_solve(a2, config2)
    worst = 0.0
    scale = float(np.max(np.abs(u1.values)))
    for m in range(len(u1)):
        mapped = dilate_vector(u1.slice(m), lam) * float(lam)
        diff = max(
            float(np.max(np.abs(mapped[j].values - u2.values[m, j])))
            for j in range(grid.n)
        )
        worst = max(worst, diff / (lam * scale))
    from .norms import dilation_pair_families

    fam_base, fam_image = dilation_pair_families(grid, lam, "ball")
    norm_dilated = sum(
        qinv_norm(c, config.alpha, windows=fam_base).value for c in a2.components
    )
    norm_original = sum(
        qinv_norm(c, config.alpha, windows=fam_image).value for c in a.components
    )
    return {
        "lambda": lam,
        "max_slice_error": worst,
        "admission_norm_dilated": norm_dilated,
        "admission_norm_original": norm_original,
        "admission_match": abs(norm_dilated - norm_original)
        / max(norm_original, 1e-300),
        "run1_converged": d1.converged,
        "run2_converged": d2.converged,
    }
