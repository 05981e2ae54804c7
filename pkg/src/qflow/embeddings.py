"""Sharp-embedding constants and operator-identity checks.

The central quantity is the normalizing integral

    C(n, alpha) = integral_{R^n} 4 sin^2(pi y_1) / |y|^{n + 2 alpha} dy,

which converts the Gagliardo double integral into the Fourier energy
integral |xi|^{2 alpha} |fhat(xi)|^2.  The sharp embedding constant of the
fractional energy into L^{2n/(n-2 alpha)} is composed from gamma factors and
C(n, alpha); consistency with the sharp Hardy-Littlewood-Sobolev constant
and with the Poisson-extension energy identity forces a pi^{alpha/2} factor
alongside the bare gamma composition, and the extremal-function quotient
reproduces exactly that value.  The report carries both compositions.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import j0, kv

from .errors import (
    AlphaOutOfRange,
    NonPositiveArgument,
    ZeroDenominator,
    ZeroField,
    ZeroModeSingular,
)
from .fields import ScalarField, VectorField, divergence, forward_transform, gradient
from .norms import WindowFamily, bmo_norm, morrey_norm, qalpha_norm
from .operators import (
    fractional_laplacian,
    poisson_semigroup,
    poisson_time_derivative,
)
from .windows import TimeQuadrature


def gamma_fn(x: float) -> float:
    """Gamma function on (0, inf); relative error at the few-ulp level."""
    if not x > 0:
        raise NonPositiveArgument(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def _check_alpha(n, alpha, need_subcritical=True):
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must be in (0, 1), got {alpha}")
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if need_subcritical and not n > 2 * alpha:
        raise AlphaOutOfRange(f"need n > 2 alpha, got n={n}, alpha={alpha}")


def _sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _angular_factor_over_r2(n: int, r):
    """(integral over S^{n-1} of 4 sin^2(pi r w_1) dw) / r^2, series-stabilized.

    n = 2: 4 pi (1 - J0(2 pi r)) / r^2;  n = 3: 8 pi (1 - sinc(2 r)) / r^2.
    """
    r = np.asarray(r, dtype=float)
    z = 2.0 * np.pi * r
    small = z < 1e-4
    zs = np.where(small, 1.0, z)
    if n == 2:
        series = 0.25 - z**2 / 64.0 + z**4 / 2304.0
        exact = (1.0 - j0(zs)) / zs**2
        core = np.where(small, series, exact)
        return 4.0 * np.pi * core * (2.0 * np.pi) ** 2
    series = 1.0 / 6.0 - z**2 / 120.0 + z**4 / 5040.0
    with np.errstate(invalid="ignore"):
        exact = (1.0 - np.sin(zs) / zs) / zs**2
    core = np.where(small, series, exact)
    return 8.0 * np.pi * core * (2.0 * np.pi) ** 2


@functools.lru_cache(maxsize=None)
def _j0_oscillatory_tail(alpha: float, dps: int) -> float:
    """integral_1^inf r^{-1-2 alpha} J0(2 pi r) dr by zero-partitioned quadrature."""
    import mpmath as mp

    with mp.workdps(dps):
        val = mp.quadosc(
            lambda r: r ** (-1 - 2 * alpha) * mp.besselj(0, 2 * mp.pi * r),
            [1, mp.inf],
            zeros=lambda k: mp.besseljzero(0, int(k)) / (2 * mp.pi),
        )
        return float(val)


@functools.lru_cache(maxsize=None)
def c_alpha_integral(n: int, alpha: float, rtol: float = 1e-10):
    """Normalizing integral C(n, alpha) with an error estimate.

    Split at |y| = 1: the unit-ball part folds the integrable endpoint weight
    r^{1-2 alpha} into an algebraic-weight rule; outside, the non-oscillatory
    part integrates in closed form and the oscillatory remainder is summed
    between Bessel zeros (n = 2) or with a sine-weighted rule (n = 3).
    """
    _check_alpha(n, alpha, need_subcritical=False)
    near, near_err = integrate.quad(
        lambda r: _angular_factor_over_r2(n, r),
        0.0,
        1.0,
        weight="alg",
        wvar=(1.0 - 2.0 * alpha, 0.0),
        epsabs=0.0,
        epsrel=rtol,
        limit=400,
    )
    omega = _sphere_area(n)
    far_const = omega / alpha
    if n == 2:
        dps = max(20, int(-math.log10(rtol)) + 8)
        tail = _j0_oscillatory_tail(float(alpha), dps)
        far_osc = -4.0 * np.pi * tail
        osc_err = abs(far_osc) * 10.0 ** (-(dps - 6))
    else:
        # far oscillatory part: -4 integral_1^inf r^{-2-2 alpha} sin(2 pi r) dr
        val, osc_err = integrate.quad(
            lambda r: r ** (-2.0 - 2.0 * alpha),
            1.0,
            np.inf,
            weight="sin",
            wvar=2.0 * np.pi,
            epsabs=1e-13,
            limit=400,
        )
        far_osc = -4.0 * val
        osc_err *= 4.0
    value = near + far_const + far_osc
    error = near_err + osc_err + 1e-14 * abs(value)
    return float(value), float(error)


def c_alpha_closed_form(n: int, alpha: float) -> float:
    """Independent closed form of C(n, alpha) via the one-sided cosine moment."""
    _check_alpha(n, alpha, need_subcritical=False)
    return (
        2.0
        * (2.0 * np.pi) ** (2.0 * alpha)
        * np.pi ** (n / 2.0)
        * gamma_fn(1.0 - alpha)
        / (alpha * 4.0**alpha * gamma_fn(n / 2.0 + alpha))
    )


@dataclass
class ConstantReport:
    """Composed sharp-embedding constant and its factors."""

    n: int
    alpha: float
    gamma_ratio: float  # (Gamma((n-2a)/2) / Gamma((n+2a)/2))^{1/2}
    hls_factor: float  # (Gamma(n) / Gamma(n/2))^{alpha/n}
    c_integral: float
    c_integral_error: float
    constant: float  # sharp value, carries pi^{alpha/2}
    bare_composition: float  # gamma factors against C alone, no pi^{alpha/2}
    tau: float  # constant of the Poisson-energy form of the inequality
    kappa: float  # Poisson-energy to Fourier-energy conversion factor
    consistency_ratio: float  # constant / sqrt(tau * kappa / C); 1 up to rounding

    def json_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "gamma_ratio": self.gamma_ratio,
            "hls_factor": self.hls_factor,
            "c_integral": self.c_integral,
            "c_integral_error": self.c_integral_error,
            "constant": self.constant,
            "bare_composition": self.bare_composition,
            "tau": self.tau,
            "kappa": self.kappa,
            "consistency_ratio": self.consistency_ratio,
        }


def poisson_energy_factor(alpha: float) -> float:
    """kappa(alpha): full-gradient Poisson energy = kappa * Fourier energy."""
    return 8.0 * np.pi**2 * gamma_fn(2.0 * (1.0 - alpha)) / (4.0 * np.pi) ** (
        2.0 * (1.0 - alpha)
    )


def sharp_sobolev_constant(n: int, alpha: float, rtol: float = 1e-10) -> ConstantReport:
    """Best constant of the embedding of the alpha-energy into L^{2n/(n-2 alpha)}.

    The sharp value is pi^{alpha/2} * gamma_ratio * hls_factor / sqrt(C);
    it coincides with sqrt(tau * kappa / C) where tau is the sharp constant
    of the Poisson-energy form, and it is the value the extremal quotient
    attains.  The bare composition without pi^{alpha/2} is reported for
    comparison.
    """
    _check_alpha(n, alpha)
    g_minus = gamma_fn((n - 2.0 * alpha) / 2.0)
    g_plus = gamma_fn((n + 2.0 * alpha) / 2.0)
    gamma_ratio = math.sqrt(g_minus / g_plus)
    hls_factor = (gamma_fn(float(n)) / gamma_fn(n / 2.0)) ** (alpha / n)
    C, C_err = c_alpha_integral(n, alpha, rtol)
    bare = gamma_ratio * hls_factor / math.sqrt(C)
    constant = np.pi ** (alpha / 2.0) * bare
    tau = (
        2.0 ** (1.0 - 4.0 * alpha)
        * g_minus
        / (np.pi**alpha * gamma_fn(2.0 * (1.0 - alpha)) * g_plus)
        * (gamma_fn(float(n)) / gamma_fn(n / 2.0)) ** (2.0 * alpha / n)
    )
    kappa = poisson_energy_factor(alpha)
    consistency = constant / math.sqrt(tau * kappa / C)
    return ConstantReport(
        n=n,
        alpha=alpha,
        gamma_ratio=gamma_ratio,
        hls_factor=hls_factor,
        c_integral=C,
        c_integral_error=C_err,
        constant=constant,
        bare_composition=bare,
        tau=tau,
        kappa=kappa,
        consistency_ratio=consistency,
    )


# ---------------------------------------------------------------------------
# extremal-function quotient on R^n by radial quadrature
# ---------------------------------------------------------------------------


def _extremal_fourier_profile(n, alpha):
    """Radial Fourier transform of (1 + |x|^2)^{(2 alpha - n)/2}.

    Subordination gives fhat(xi) = (2 pi^{n/2} / Gamma((n-2 alpha)/2))
    * (pi |xi|)^{-alpha} K_alpha(2 pi |xi|).
    """
    s = (n - 2.0 * alpha) / 2.0
    pref = 2.0 * np.pi ** (n / 2.0) / gamma_fn(s)

    def fhat(rho):
        return pref * (np.pi * rho) ** (-alpha) * kv(alpha, 2.0 * np.pi * rho)

    return fhat


def extremal_ratio(n: int, alpha: float, rtol: float = 1e-10):
    """Quotient |f|_{L^{2n/(n-2 alpha)}} / |f|_{alpha-energy} for the extremal
    profile f(x) = (1 + |x|^2)^{(2 alpha - n)/2}, computed on R^n by radial
    quadrature (the profile is not periodic, so the torus is not used).

    Returns (ratio, error_estimate).
    """
    _check_alpha(n, alpha)
    omega = _sphere_area(n)
    # numerator: |f|^q = (1 + r^2)^{-n} independent of alpha
    num, num_err = integrate.quad(
        lambda r: omega * r ** (n - 1) * (1.0 + r * r) ** (-n),
        0.0,
        np.inf,
        epsabs=0.0,
        epsrel=rtol,
        limit=400,
    )
    q = 2.0 * n / (n - 2.0 * alpha)
    numerator = num ** (1.0 / q)
    fhat = _extremal_fourier_profile(n, alpha)

    def energy_integrand(rho):
        return omega * rho ** (2.0 * alpha + n - 1) * fhat(rho) ** 2

    e1, err1 = integrate.quad(energy_integrand, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=400)
    e2, err2 = integrate.quad(energy_integrand, 1.0, np.inf, epsabs=0.0, epsrel=rtol, limit=400)
    C, C_err = c_alpha_integral(n, alpha, rtol)
    denominator = math.sqrt(C * (e1 + e2))
    ratio = numerator / denominator
    rel = (
        num_err / max(num, 1e-300) / q
        + 0.5 * (err1 + err2) / max(e1 + e2, 1e-300)
        + 0.5 * C_err / C
    )
    return float(ratio), float(abs(ratio) * rel)


def gaussian_ratio(n: int, alpha: float, rtol: float = 1e-10) -> float:
    """Same quotient for the non-extremal profile f(x) = exp(-|x|^2)."""
    _check_alpha(n, alpha)
    omega = _sphere_area(n)
    q = 2.0 * n / (n - 2.0 * alpha)
    num, _ = integrate.quad(
        lambda r: omega * r ** (n - 1) * np.exp(-q * r * r),
        0.0,
        np.inf,
        epsabs=0.0,
        epsrel=rtol,
    )
    numerator = num ** (1.0 / q)
    # fhat of exp(-|x|^2) is (pi)^{n/2} ... with the 2 pi convention:
    # integral exp(-|x|^2) exp(-2 pi i x.xi) dx = pi^{n/2} exp(-pi^2 |xi|^2)
    pref = np.pi ** (n / 2.0)
    energy, _ = integrate.quad(
        lambda rho: omega
        * rho ** (2.0 * alpha + n - 1)
        * (pref * np.exp(-np.pi**2 * rho * rho)) ** 2,
        0.0,
        np.inf,
        epsabs=0.0,
        epsrel=rtol,
    )
    C, _ = c_alpha_integral(n, alpha, rtol)
    return float(numerator / math.sqrt(C * energy))


# ---------------------------------------------------------------------------
# Poisson-extension energy identity on the torus
# ---------------------------------------------------------------------------


def _poisson_energy_time_nodes(grid, nodes_per_panel=32, panels=None):
    """Composite rule resolving exp(-4 pi |xi| t) for every resolved mode."""
    xi_max = math.sqrt(grid.n) * (grid.N / 2.0) / grid.L
    xi_min = 1.0 / grid.L
    t_first = 1.0 / (4.0 * np.pi * xi_max)
    t_last = 10.0 / xi_min / (4.0 * np.pi) * 4.0  # exp(-40) truncation
    if panels is None:
        panels = max(6, int(math.ceil(math.log2(t_last / t_first))) + 1)
    return t_first, t_last, panels, nodes_per_panel


def poisson_energy_identity(
    f: ScalarField, alpha: float, nodes_per_panel: int = 32
) -> tuple:
    """Both sides of the weighted Poisson-extension energy identity.

    lhs = integral_0^inf (|d/dt P_t f|_{L2}^2 + |grad_x P_t f|_{L2}^2) t^{1-2 alpha} dt
    computed by composite quadrature on field-space norms (Gauss-Jacobi panel
    at the weight singularity, then geometrically growing Gauss-Legendre
    panels until the slowest mode has decayed to exp(-40)).

    rhs = kappa(alpha) * sum_k |xi_k|^{2 alpha} |fhat_k|^2 / L^n, the closed
    Fourier form with kappa the exact per-mode Gamma integral.

    The gradient is the full upper-half-space gradient of the extension; its
    time component contributes exactly half of the energy.
    """
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must be in (0, 1), got {alpha}")
    F = forward_transform(f)
    total = float(np.sum(np.abs(F.coefficients) ** 2))
    if total == 0.0:
        return 0.0, 0.0
    zero_mode = abs(F.coefficients[(0,) * f.grid.n])
    if zero_mode > 1e-12 * math.sqrt(total):
        raise ZeroModeSingular("field must have zero mean")

    grid = f.grid

    def energy(t):
        dt_field = poisson_time_derivative(f, t)
        g = gradient(poisson_semigroup(f, t))
        return dt_field.norm_l2() ** 2 + sum(c.norm_l2() ** 2 for c in g)

    t_first, t_last, panels, npan = _poisson_energy_time_nodes(grid, nodes_per_panel)
    quad = TimeQuadrature(nodes=npan)
    t0, w0 = quad.rule(t_first, 1.0 - 2.0 * alpha)
    lhs = float(np.sum(w0 * np.array([energy(t) for t in t0])))
    edges = np.geomspace(t_first, t_last, panels + 1)
    from numpy.polynomial.legendre import leggauss

    xg, wg = leggauss(npan)
    for a, b in zip(edges[:-1], edges[1:]):
        t = (b - a) / 2.0 * xg + (a + b) / 2.0
        w = (b - a) / 2.0 * wg
        vals = np.array([energy(ti) for ti in t])
        lhs += float(np.sum(w * vals * t ** (1.0 - 2.0 * alpha)))

    rad = grid.frequency_radius()
    rhs = poisson_energy_factor(alpha) * float(
        np.sum(rad ** (2.0 * alpha) * np.abs(F.coefficients) ** 2) / grid.volume
    )
    return lhs, rhs


# ---------------------------------------------------------------------------
# norm-comparison checks
# ---------------------------------------------------------------------------


def bmo_bound_check(f: ScalarField, alpha: float, windows: WindowFamily = None):
    """(BMO norm / Q_alpha norm, closed bound sqrt(n^{(n+2 alpha)/2} / 2)).

    The bound holds window by window for the discrete sums, so the quotient
    respects it for any shared window family.
    """
    q = qalpha_norm(f, alpha, windows)
    if q.value == 0.0:
        raise ZeroDenominator("Q_alpha norm vanishes (constant field?)")
    b = bmo_norm(f, windows)
    n = f.grid.n
    bound = math.sqrt(n ** ((n + 2.0 * alpha) / 2.0) / 2.0)
    return b.value / q.value, bound


def isomorphism_check(f: ScalarField, alpha: float, windows: WindowFamily = None):
    """Morrey norm of the alpha-th Laplacian power against the Q_alpha norm.

    Comparability of the two sides over a corpus exhibits the isomorphism
    between Q_alpha and the fractionally-integrated Morrey space; the
    implicit constants are measured, not asserted.
    """
    q = qalpha_norm(f, alpha, windows)
    if q.value == 0.0:
        raise ZeroDenominator("Q_alpha norm vanishes")
    g = fractional_laplacian(f, alpha)
    m = morrey_norm(g, alpha, windows)
    return m.value / q.value


def divergence_representation(f: ScalarField):
    """Write a zero-mean field as sum_k d/dx_k f_k with f_k = -d/dx_k (-Delta)^{-1} f.

    Returns (VectorField of components, relative residual of the identity).
    """
    grid = f.grid
    F = np.fft.fftn(f.values)
    scale = math.sqrt(float(np.sum(np.abs(F) ** 2)) / grid.size) * grid.volume
    if scale == 0.0:
        raise ZeroField("divergence representation of the zero field")
    if abs(F[(0,) * grid.n]) > 1e-12 * math.sqrt(float(np.sum(np.abs(F) ** 2))):
        raise ZeroModeSingular("field must have zero mean")
    xi = grid.frequencies()
    rad2 = grid.frequency_radius() ** 2
    safe = rad2.copy()
    safe[(0,) * grid.n] = 1.0
    comps = []
    for j in range(grid.n):
        sym = -2j * np.pi * xi[j] / (4.0 * np.pi**2 * safe)
        sym[(0,) * grid.n] = 0.0
        comps.append(ScalarField(grid, np.fft.ifftn(sym * F)))
    v = VectorField(comps)
    resid = divergence(v) - f + ScalarField.constant(grid, f.mean())
    return v, resid.norm_l2() / max(f.norm_l2(), 1e-300)
