"""Discretized sup-type norms and Carleson functionals.

Every functional here replaces a continuum supremum over cubes or balls by a
finite WindowFamily and reports the per-window values alongside the maximum.
Window sums follow a fixed canonical ordering (row-major over the offset
list) and reduce with np.sum, so results are reproducible bit for bit and can
be matched exactly by brute-force enumeration on small grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlphaOutOfRange,
    EmptyTrajectory,
    EmptyWindowFamily,
    NoWindowBelowT,
    UnknownKind,
)
from .fields import ScalarField, forward_transform, gradient
from .operators import MultiplierSpec, apply_multiplier
from .spacetime import SpaceTimeField
from .windows import (
    CarlesonWindow,
    TimeQuadrature,
    WindowFamily,
    default_radii,
    window_flat_indices,
    window_offsets,
)


@dataclass
class WindowValue:
    center: tuple
    radius: float
    value: float

    def json_dict(self, n: int) -> dict:
        cx = list(self.center) + [0] * (3 - len(self.center))
        return {
            "cx": int(cx[0]),
            "cy": int(cx[1]),
            "cz": int(cx[2]),
            "r": self.radius,
            "value": self.value,
        }


@dataclass
class NormReport:
    """Norm value with per-window breakdown and discretization metadata."""

    value: float
    alpha: float | None
    T: float | None
    kind: str
    windows: list
    meta: dict = field(default_factory=dict)

    @property
    def argmax(self) -> WindowValue:
        return max(self.windows, key=lambda w: w.value)

    def json_dict(self) -> dict:
        n = len(self.windows[0].center) if self.windows else 3
        return {
            "value": self.value,
            "alpha": self.alpha,
            "T": self.T,
            "windows": [w.json_dict(n) for w in self.windows],
            "meta": dict(self.meta),
        }

    def csv_rows(self):
        header = ["cx", "cy", "cz", "r", "value"]
        rows = []
        for w in self.windows:
            d = w.json_dict(3)
            rows.append([d["cx"], d["cy"], d["cz"], repr(d["r"]), repr(d["value"])])
        return header, rows


def _row_sums(matrix: np.ndarray) -> np.ndarray:
    """Per-row 1-D pairwise sums: the canonical reduction for node-by-node
    ball sums (axis reductions block differently and drift by an ulp)."""
    return np.array([np.sum(row) for row in matrix])


def _require_family(f, geometry, windows) -> WindowFamily:
    if windows is None:
        windows = WindowFamily.build(f.grid, geometry)
    if len(windows) == 0:
        raise EmptyWindowFamily("window family is empty")
    if windows.geometry != geometry:
        raise ValueError(f"expected {geometry} windows, got {windows.geometry}")
    return windows


def _check_alpha(alpha, lo, hi, lo_open=True):
    ok = (alpha > lo if lo_open else alpha >= lo) and alpha < hi
    if not ok:
        bracket = "(" if lo_open else "["
        raise AlphaOutOfRange(f"alpha must be in {bracket}{lo}, {hi}), got {alpha}")


# ---------------------------------------------------------------------------
# oscillation norms over cubes (BMO / quadratic Morrey)
# ---------------------------------------------------------------------------


def morrey_norm(f: ScalarField, alpha: float, windows: WindowFamily = None) -> NormReport:
    """sup over cubes of (ell^{2 alpha - n} * integral_I |f - mean|^2)^{1/2}.

    alpha = 0 is exactly the BMO norm.  ell is the nominal sidelength 2r; the
    mean is taken over the window's own samples.
    """
    _check_alpha(alpha, 0.0, 1.0, lo_open=False)
    windows = _require_family(f, "cube", windows)
    grid = f.grid
    flat = f.values.ravel()
    out = []
    for w in windows:
        idx = window_flat_indices(grid, w, "cube")
        vals = flat[idx]
        mean = np.mean(vals)
        cell = (w.stride * grid.h) ** grid.n
        ell = 2.0 * w.radius
        val2 = ell ** (2.0 * alpha - grid.n) * cell * np.sum(np.abs(vals - mean) ** 2)
        out.append(WindowValue(w.center, w.radius, float(np.sqrt(val2))))
    value = max(v.value for v in out)
    return NormReport(
        value,
        alpha,
        None,
        "morrey" if alpha != 0.0 else "bmo",
        out,
        meta={"geometry": "cube", "window_count": len(out)},
    )


def bmo_norm(f: ScalarField, windows: WindowFamily = None) -> NormReport:
    """Quadratic-oscillation BMO norm; the alpha = 0 Morrey norm bit for bit."""
    return morrey_norm(f, 0.0, windows)


# ---------------------------------------------------------------------------
# Gagliardo-type double sums (Q_alpha and the Sobolev energy)
# ---------------------------------------------------------------------------


def _pair_weights(grid, offs, alpha):
    """1 / d(x,y)^{n + 2 alpha} over offset pairs, periodic distance, zero diagonal."""
    diff = offs[:, None, :] - offs[None, :, :]
    diff = np.where(diff > grid.N // 2, diff - grid.N, diff)
    diff = np.where(diff <= -grid.N // 2, diff + grid.N, diff)
    d2 = np.sum((diff * grid.h) ** 2, axis=-1)
    np.fill_diagonal(d2, 1.0)
    w = d2 ** (-(grid.n + 2.0 * alpha) / 2.0)
    np.fill_diagonal(w, 0.0)
    return w


def qalpha_norm(f: ScalarField, alpha: float, windows: WindowFamily = None) -> NormReport:
    """sup over cubes of the scale-weighted Gagliardo double sum.

    Per window: ell^{2 alpha - n} * cell^2 * sum_{x != y} |f(x)-f(y)|^2 / d^{n+2 alpha},
    periodic distance, diagonal excluded (the singularity is integrable for
    alpha < 1).
    """
    _check_alpha(alpha, 0.0, 1.0)
    windows = _require_family(f, "cube", windows)
    grid = f.grid
    flat = f.values.ravel()
    weight_cache = {}
    out = []
    pair_count = 0
    for w in windows:
        key = (w.radius, w.stride)
        if key not in weight_cache:
            offs = window_offsets(grid, w, "cube")
            weight_cache[key] = (offs, _pair_weights(grid, offs, alpha))
        offs, W = weight_cache[key]
        idx = window_flat_indices(grid, w, "cube")
        vals = flat[idx]
        diff2 = np.abs(vals[:, None] - vals[None, :]) ** 2
        cell = (w.stride * grid.h) ** grid.n
        ell = 2.0 * w.radius
        val2 = ell ** (2.0 * alpha - grid.n) * cell**2 * np.sum(W * diff2)
        pair_count += W.shape[0] * (W.shape[0] - 1)
        out.append(WindowValue(w.center, w.radius, float(np.sqrt(val2))))
    value = max(v.value for v in out)
    return NormReport(
        value,
        alpha,
        None,
        "qalpha",
        out,
        meta={"geometry": "cube", "window_count": len(out), "pair_count": pair_count},
    )


def sobolev_seminorm(f: ScalarField, alpha: float, side: str = "fourier") -> float:
    """Homogeneous Sobolev energy of order alpha in (0, 1).

    fourier:     (C(n, alpha) * sum |xi|^{2 alpha} |fhat|^2 / L^n)^{1/2} with the
                 sharp-embedding normalizing integral C(n, alpha).
    real-space:  Gagliardo double sum over the torus with periodic distance
                 truncated to |x - y| <= L/4, plus the far-pair tail estimate
                 of sobolev_far_tail_estimate.  The two sides agree for fields
                 concentrated well inside the box; the kernel tail decays only
                 like L^{-2 alpha}, so the additive estimate is what makes the
                 truncated sum comparable at practical box sizes.
    """
    _check_alpha(alpha, 0.0, 1.0)
    grid = f.grid
    if side == "fourier":
        from .embeddings import c_alpha_integral

        C, _ = c_alpha_integral(grid.n, alpha)
        F = forward_transform(f)
        rad = grid.frequency_radius()
        energy = np.sum(rad ** (2.0 * alpha) * np.abs(F.coefficients) ** 2) / grid.volume
        return float(np.sqrt(C * energy))
    if side == "real-space":
        N, h, n = grid.N, grid.h, grid.n
        axis = np.arange(N)
        axis = np.where(axis > N // 2, axis - N, axis)
        meshes = np.meshgrid(*([axis] * n), indexing="ij")
        d2 = sum((m * h) ** 2 for m in meshes)
        cutoff = grid.L / 4.0
        total = 0.0
        it = np.ndindex(*grid.shape)
        vals = f.values
        for delta in it:
            if d2[delta] == 0.0 or d2[delta] > cutoff**2:
                continue
            shifted = np.roll(vals, shift=[-d for d in delta], axis=tuple(range(n)))
            num = np.sum(np.abs(vals - shifted) ** 2)
            total += num / d2[delta] ** ((n + 2.0 * alpha) / 2.0)
        total = grid.cell_volume**2 * total + sobolev_far_tail_estimate(f, alpha)
        return float(np.sqrt(total))
    raise UnknownKind(f"sobolev side must be 'fourier' or 'real-space', got {side!r}")


def sobolev_far_tail_estimate(f: ScalarField, alpha: float) -> float:
    """Estimated (squared) Gagliardo mass of pairs beyond the L/4 truncation.

    For |x - y| > L/4 and f concentrated inside the box the cross term is
    negligible, so the omitted mass is approximately

        2 * |f - mean f|_{L2}^2 * omega_{n-1} * (L/4)^{-2 alpha} / (2 alpha),

    the exact kernel tail integral against |f(x)|^2 + |f(y)|^2.  Subtracting
    the mean keeps the estimate zero on constants.
    """
    from scipy.special import gamma as _gamma

    grid = f.grid
    omega = 2.0 * np.pi ** (grid.n / 2.0) / _gamma(grid.n / 2.0)
    R = grid.L / 4.0
    centered = f - ScalarField.constant(grid, f.mean())
    return float(
        2.0 * centered.norm_l2() ** 2 * omega * R ** (-2.0 * alpha) / (2.0 * alpha)
    )


# ---------------------------------------------------------------------------
# Carleson functionals of semigroup extensions
# ---------------------------------------------------------------------------

CARLESON_KINDS = ("generic-psi", "poisson-derivative", "heat-gradient", "morrey-poisson")


def _carleson_slice_fields(f, kind, times, symbol):
    """|integrand|^2 field per time node for the requested characterization."""
    grid = f.grid
    F = np.fft.fftn(f.values)
    rad = grid.frequency_radius()
    out = np.empty((times.size,) + grid.shape, dtype=float)
    if kind == "poisson-derivative" or kind == "morrey-poisson":
        for i, t in enumerate(times):
            sym = -2.0 * np.pi * rad * np.exp(-2.0 * np.pi * t * rad)
            out[i] = np.abs(np.fft.ifftn(sym * F)) ** 2
    elif kind == "heat-gradient":
        xi = grid.frequencies()
        for i, t in enumerate(times):
            heat = np.exp(-4.0 * np.pi**2 * (t * t) * rad**2)
            acc = np.zeros(grid.shape, dtype=float)
            for j in range(grid.n):
                acc += np.abs(np.fft.ifftn(2j * np.pi * xi[j] * heat * F)) ** 2
            out[i] = acc
    elif kind == "generic-psi":
        xi = grid.frequencies()
        for i, t in enumerate(times):
            sym = np.asarray(symbol(*(t * x for x in xi)), dtype=np.complex128)
            out[i] = np.abs(np.fft.ifftn(sym * F)) ** 2
    else:
        raise UnknownKind(f"unknown Carleson kind {kind!r}")
    return out


def carleson_functional(
    f: ScalarField,
    alpha: float,
    kind: str,
    windows: WindowFamily = None,
    quadrature: TimeQuadrature = None,
    symbol=None,
) -> NormReport:
    """Window suprema of square-function Carleson integrals.

    kinds (time interval (0, r), ball windows):
      poisson-derivative   |d/dt Poisson extension|^2, weight t^{1 - 2 alpha}
      heat-gradient        |grad e^{t^2 Delta} f|^2,   weight t^{1 - 2 alpha}
      morrey-poisson       |d/dt Poisson extension|^2, weight t
      generic-psi          |psi_t * f|^2, weight t^{-(1 + 2 alpha)}; psi enters
                           through its Fourier symbol m, psi_t <-> m(t xi).
                           The non-integrable part of the weight is split off:
                           the rule integrates t^{1 - 2 alpha} against
                           |psi_t * f|^2 / t^2, which stays bounded for
                           mean-zero psi.
    """
    if kind not in CARLESON_KINDS:
        raise UnknownKind(f"kind must be one of {CARLESON_KINDS}, got {kind!r}")
    if kind != "morrey-poisson":
        _check_alpha(alpha, 0.0, 1.0)
    if kind == "generic-psi" and symbol is None:
        raise ValueError("generic-psi requires the multiplier symbol of psi")
    windows = _require_family(f, "ball", windows)
    quadrature = quadrature or TimeQuadrature()
    grid = f.grid

    if kind == "morrey-poisson":
        exponent = 1.0
    elif kind == "generic-psi":
        exponent = 1.0 - 2.0 * alpha  # remaining t^{-2} moved into the integrand
    else:
        exponent = 1.0 - 2.0 * alpha

    radii = sorted({(w.radius, w.stride) for w in windows}, reverse=True)
    cache = {}
    for r, stride in radii:
        t, wq = quadrature.rule(r, exponent)
        slices = _carleson_slice_fields(f, kind, t, symbol)
        if kind == "generic-psi":
            slices = slices / t.reshape((-1,) + (1,) * grid.n) ** 2
        cache[(r, stride)] = (t, wq, slices.reshape(t.size, -1))

    out = []
    for w in windows:
        t, wq, slices = cache[(w.radius, w.stride)]
        idx = window_flat_indices(grid, w, "ball")
        cell = (w.stride * grid.h) ** grid.n
        ball_sums = _row_sums(slices[:, idx])
        val2 = w.radius ** (2.0 * alpha - grid.n) * np.sum(wq * cell * ball_sums)
        out.append(WindowValue(w.center, w.radius, float(np.sqrt(val2))))
    value = max(v.value for v in out)
    return NormReport(
        value,
        alpha,
        None,
        kind,
        out,
        meta={
            "geometry": "ball",
            "window_count": len(out),
            "quadrature_nodes": quadrature.nodes,
        },
    )


def qinv_norm(
    f: ScalarField,
    alpha: float,
    T: float = None,
    windows: WindowFamily = None,
    quadrature: TimeQuadrature = None,
) -> NormReport:
    """Heat-extension Carleson norm of initial data.

    Per window: (r^{2 alpha - n} * integral_0^{r^2} integral_ball
    |e^{t Delta} f|^2 t^{-alpha})^{1/2}, windows restricted to radius < T.
    T = None means no horizon (the scale-invariant norm).
    """
    _check_alpha(alpha, 0.0, 1.0, lo_open=False)
    windows = _require_family(f, "ball", windows)
    if T is not None:
        kept = tuple(w for w in windows if w.radius < T)
        if not kept:
            raise NoWindowBelowT(f"no window radius below T = {T}")
        windows = WindowFamily(windows.grid, "ball", kept)
    quadrature = quadrature or TimeQuadrature()
    grid = f.grid
    F = np.fft.fftn(f.values)
    rad2 = grid.frequency_radius() ** 2

    radii = sorted({(w.radius, w.stride) for w in windows}, reverse=True)
    cache = {}
    for r, stride in radii:
        t, wq = quadrature.rule(r * r, -alpha)
        slices = np.empty((t.size, grid.size), dtype=float)
        for i, ti in enumerate(t):
            heat = np.exp(-4.0 * np.pi**2 * ti * rad2)
            slices[i] = (np.abs(np.fft.ifftn(heat * F)) ** 2).ravel()
        cache[(r, stride)] = (t, wq, slices)

    out = []
    for w in windows:
        t, wq, slices = cache[(w.radius, w.stride)]
        idx = window_flat_indices(grid, w, "ball")
        cell = (w.stride * grid.h) ** grid.n
        ball_sums = _row_sums(slices[:, idx])
        val2 = w.radius ** (2.0 * alpha - grid.n) * np.sum(wq * cell * ball_sums)
        out.append(WindowValue(w.center, w.radius, float(np.sqrt(val2))))
    value = max(v.value for v in out)
    return NormReport(
        value,
        alpha,
        T,
        "qinv",
        out,
        meta={
            "geometry": "ball",
            "window_count": len(out),
            "quadrature_nodes": quadrature.nodes,
        },
    )


def carleson_weight_domination(
    f: ScalarField,
    alpha: float,
    windows: WindowFamily = None,
    quadrature: TimeQuadrature = None,
):
    """Per-window pairs (flat-weight value, alpha-weight value) on shared nodes.

    The first entry is the BMO^{-1}-type window value r^{-n} int_0^{r^2}
    int_ball |e^{t Delta} f|^2, the second the Q^{-1}_alpha window value; both
    use the same Gauss-Jacobi t^{-alpha} nodes, so t <= r^2 makes the
    domination (first <= second) a pointwise weight comparison.
    """
    _check_alpha(alpha, 0.0, 1.0)
    windows = _require_family(f, "ball", windows)
    quadrature = quadrature or TimeQuadrature()
    grid = f.grid
    F = np.fft.fftn(f.values)
    rad2 = grid.frequency_radius() ** 2

    pairs = []
    cache = {}
    for w in windows:
        key = (w.radius, w.stride)
        if key not in cache:
            t, wq = quadrature.rule(w.radius**2, -alpha)
            slices = np.empty((t.size, grid.size), dtype=float)
            for i, ti in enumerate(t):
                heat = np.exp(-4.0 * np.pi**2 * ti * rad2)
                slices[i] = (np.abs(np.fft.ifftn(heat * F)) ** 2).ravel()
            cache[key] = (t, wq, slices)
        t, wq, slices = cache[key]
        idx = window_flat_indices(grid, w, "ball")
        cell = (w.stride * grid.h) ** grid.n
        ball_sums = cell * _row_sums(slices[:, idx])
        flat2 = w.radius ** (-grid.n) * np.sum(wq * t**alpha * ball_sums)
        alpha2 = w.radius ** (2.0 * alpha - grid.n) * np.sum(wq * ball_sums)
        pairs.append((float(flat2), float(alpha2), w))
    return pairs


def vanishing_check(
    f: ScalarField,
    alpha: float,
    T_sequence,
    windows: WindowFamily = None,
    quadrature: TimeQuadrature = None,
):
    """qinv_norm at each horizon of a strictly decreasing T sequence."""
    T_sequence = list(T_sequence)
    if any(b >= a for a, b in zip(T_sequence, T_sequence[1:])):
        raise ValueError("T_sequence must be strictly decreasing")
    return [
        qinv_norm(f, alpha, T=T, windows=windows, quadrature=quadrature).value
        for T in T_sequence
    ]


# ---------------------------------------------------------------------------
# the solution-space norm: sup_t sqrt(t) |g|_inf plus a Carleson term
# ---------------------------------------------------------------------------


def xnorm_radii(grid, T: float, levels: int = 4):
    """Dyadic radii anchored at sqrt(T): r_j = sqrt(T)/2^j, capped at L/2.

    Anchoring at the horizon keeps the family exactly dyadic under the
    parabolic rescaling (t, x) -> (lam^2 t, lam x).
    """
    root = np.sqrt(T)
    radii = [root / 2.0**j for j in range(1, levels + 1)]
    return [r for r in radii if r <= grid.L / 2.0]


def x_norm(
    g: SpaceTimeField,
    alpha: float,
    T: float = None,
    windows: WindowFamily = None,
    quadrature: TimeQuadrature = None,
    parts: bool = False,
):
    """Norm of a space-time trajectory: sup_t sqrt(t)*|g(t)|_inf plus the
    heat-Carleson term with windows of radius r, r^2 < T.

    The Carleson integrand interpolates the stored slices linearly in t.
    """
    _check_alpha(alpha, 0.0, 1.0)
    if len(g) == 0:
        raise EmptyTrajectory("empty trajectory")
    grid = g.grid
    if T is None:
        T = float(g.times[-1])
    sup_term = 0.0
    for i, t in enumerate(g.times):
        if 0.0 < t <= T:
            sup_term = max(sup_term, np.sqrt(t) * float(np.max(np.abs(g.values[i]))))

    if windows is None:
        radii = xnorm_radii(grid, T)
        windows = (
            WindowFamily.build(grid, "ball", radii=radii) if radii else None
        )
    quadrature = quadrature or TimeQuadrature()
    carleson = 0.0
    if windows is not None:
        windows = _require_family(g.slice(0), "ball", windows)
        cache = {}
        best = 0.0
        for w in windows:
            if w.radius**2 >= T:
                continue
            key = (w.radius, w.stride)
            if key not in cache:
                t, wq = quadrature.rule(w.radius**2, -alpha)
                slices = np.empty((t.size, grid.size), dtype=float)
                for i, ti in enumerate(t):
                    slices[i] = (np.abs(g.interpolate(ti)) ** 2).ravel()
                cache[key] = (t, wq, slices)
            t, wq, slices = cache[key]
            idx = window_flat_indices(grid, w, "ball")
            cell = (w.stride * grid.h) ** grid.n
            ball_sums = _row_sums(slices[:, idx])
            val2 = w.radius ** (2.0 * alpha - grid.n) * np.sum(wq * cell * ball_sums)
            best = max(best, float(val2))
        carleson = float(np.sqrt(best))
    total = sup_term + carleson
    if parts:
        return total, sup_term, carleson
    return total


# ---------------------------------------------------------------------------
# exact dyadic dilation checks
# ---------------------------------------------------------------------------


def dilation_pair_families(grid, lam: int, geometry: str, pair_sum: bool = False):
    """(family for the dilated field, exactly corresponding family for the original).

    Radii are restricted so image windows still fit: lam*r <= L/2 for
    pointwise sums, 2*lam*r <= L/2 for pair sums (periodic distances then
    scale exactly).
    """
    cap = grid.L / (4.0 * lam) if pair_sum else grid.L / (2.0 * lam)
    radii = [r for r in default_radii(grid) if r <= cap]
    if not radii:
        raise EmptyWindowFamily(f"no dyadic radius fits under dilation by {lam}")
    base = WindowFamily.build(grid, geometry, radii=radii)
    return base, base.image(lam)
