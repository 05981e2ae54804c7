import numpy as np
import pytest

from qflow.errors import AlphaOutOfRange, NoWindowBelowT
from qflow.fields import Grid, ScalarField, dilate
from qflow.norms import (
    bmo_norm,
    carleson_functional,
    carleson_weight_domination,
    dilation_pair_families,
    morrey_norm,
    qalpha_norm,
    qinv_norm,
    sobolev_far_tail_estimate,
    sobolev_seminorm,
    vanishing_check,
    x_norm,
    xnorm_radii,
)
from qflow.operators import heat_extension, heat_semigroup
from qflow.windows import CarlesonWindow, TimeQuadrature, WindowFamily

from conftest import band_limited_field, make_rng, random_field

# ---------------------------------------------------------------------------
# brute-force oracles: same documented discretization, independent code path
# (python loops over every window of the family, canonical offset order)
# ---------------------------------------------------------------------------


def oracle_cube_samples(grid, center, radius, stride):
    """Lexicographic offsets o with |o|_inf * h < radius, step `stride`."""
    m = int(np.ceil(radius / (stride * grid.h))) * stride
    m = min(m, grid.N // 2)
    offsets = []
    rng_axis = list(range(-m, m + 1, stride))
    if grid.n == 2:
        for o1 in rng_axis:
            for o2 in rng_axis:
                if abs(o1) * grid.h < radius and abs(o2) * grid.h < radius:
                    offsets.append((o1, o2))
    else:
        for o1 in rng_axis:
            for o2 in rng_axis:
                for o3 in rng_axis:
                    if (
                        abs(o1) * grid.h < radius
                        and abs(o2) * grid.h < radius
                        and abs(o3) * grid.h < radius
                    ):
                        offsets.append((o1, o2, o3))
    return offsets


def oracle_ball_samples(grid, center, radius, stride):
    m = int(np.ceil(radius / (stride * grid.h))) * stride
    m = min(m, grid.N // 2)
    offsets = []
    rng_axis = list(range(-m, m + 1, stride))
    import itertools

    for o in itertools.product(rng_axis, repeat=grid.n):
        if np.sqrt(sum((oj * grid.h) ** 2 for oj in o)) < radius:
            offsets.append(o)
    return offsets


def oracle_gather(f, center, offsets):
    vals = []
    for o in offsets:
        idx = tuple((c + oj) % f.grid.N for c, oj in zip(center, o))
        vals.append(f.values[idx])
    return np.array(vals)


def oracle_morrey(f, family, alpha):
    grid = f.grid
    best = -np.inf
    for w in family:
        offs = oracle_cube_samples(grid, w.center, w.radius, w.stride)
        vals = oracle_gather(f, w.center, offs)
        mean = np.mean(vals)
        cell = (w.stride * grid.h) ** grid.n
        ell = 2.0 * w.radius
        val2 = ell ** (2.0 * alpha - grid.n) * cell * np.sum(np.abs(vals - mean) ** 2)
        best = max(best, float(np.sqrt(val2)))
    return best


def oracle_qalpha(f, family, alpha):
    grid = f.grid
    best = -np.inf
    for w in family:
        offs = oracle_cube_samples(grid, w.center, w.radius, w.stride)
        vals = oracle_gather(f, w.center, offs)
        M = len(offs)
        terms = np.zeros((M, M))
        for p in range(M):
            for q in range(M):
                if p == q:
                    continue
                diff = np.array(offs[p]) - np.array(offs[q])
                diff = np.where(diff > grid.N // 2, diff - grid.N, diff)
                diff = np.where(diff <= -grid.N // 2, diff + grid.N, diff)
                d2 = np.sum((diff * grid.h) ** 2)
                w_pq = d2 ** (-(grid.n + 2.0 * alpha) / 2.0)
                terms[p, q] = w_pq * np.abs(vals[p] - vals[q]) ** 2
        cell = (w.stride * grid.h) ** grid.n
        ell = 2.0 * w.radius
        val2 = ell ** (2.0 * alpha - grid.n) * cell**2 * np.sum(terms)
        best = max(best, float(np.sqrt(val2)))
    return best


def oracle_qinv(f, family, alpha, nodes=16):
    grid = f.grid
    quad = TimeQuadrature(nodes=nodes)
    best = -np.inf
    for w in family:
        t, wq = quad.rule(w.radius**2, -alpha)
        offs = oracle_ball_samples(grid, w.center, w.radius, w.stride)
        cell = (w.stride * grid.h) ** grid.n
        ball_sums = np.empty(t.size)
        for i, ti in enumerate(t):
            sl = (np.abs(heat_semigroup(f, ti).values) ** 2).ravel()
            flat = []
            for o in offs:
                idx = tuple((c + oj) % grid.N for c, oj in zip(w.center, o))
                flat.append(np.ravel_multi_index(idx, grid.shape))
            ball_sums[i] = np.sum(sl[np.array(flat)])
        val2 = w.radius ** (2.0 * alpha - grid.n) * np.sum(wq * cell * ball_sums)
        best = max(best, float(np.sqrt(val2)))
    return best


# ---------------------------------------------------------------------------
# exhaustive equality on small grids
# ---------------------------------------------------------------------------


def test_bmo_matches_exhaustive_enumeration_2d(grid2_small):
    f = random_field(grid2_small, make_rng(50))
    family = WindowFamily.exhaustive(grid2_small, "cube")
    report = bmo_norm(f, family)
    assert report.value == oracle_morrey(f, family, 0.0)


def test_morrey_matches_exhaustive_enumeration_2d(grid2_small):
    f = random_field(grid2_small, make_rng(51))
    family = WindowFamily.exhaustive(grid2_small, "cube")
    report = morrey_norm(f, 0.4, family)
    assert report.value == oracle_morrey(f, family, 0.4)


def test_qalpha_matches_exhaustive_enumeration_2d(grid2_small):
    f = random_field(grid2_small, make_rng(52))
    family = WindowFamily.exhaustive(grid2_small, "cube")
    report = qalpha_norm(f, 0.5, family)
    assert report.value == oracle_qalpha(f, family, 0.5)


def test_qinv_matches_enumeration_2d(grid2_small):
    f = band_limited_field(grid2_small, make_rng(53), kmax=3)
    family = WindowFamily.exhaustive(grid2_small, "ball")
    quad = TimeQuadrature(nodes=16)
    report = qinv_norm(f, 0.5, windows=family, quadrature=quad)
    assert report.value == oracle_qinv(f, family, 0.5, nodes=16)


def test_norms_match_enumeration_3d(grid3_small):
    # reduced center set keeps the scalar-loop oracle affordable in 3-D
    f = random_field(grid3_small, make_rng(54))
    centers = [(0, 0, 0), (2, 4, 6), (7, 1, 3), (4, 4, 4)]
    radii = [m * grid3_small.h for m in (2, 3, 4)]
    family = WindowFamily.build(grid3_small, "cube", centers=centers, radii=radii, resolution=16)
    assert morrey_norm(f, 0.3, family).value == oracle_morrey(f, family, 0.3)
    assert qalpha_norm(f, 0.7, family).value == oracle_qalpha(f, family, 0.7)


# ---------------------------------------------------------------------------
# structural properties
# ---------------------------------------------------------------------------


def test_constants_give_zero(grid2):
    c = ScalarField.constant(grid2, 3.1 - 0.2j)
    # sample means of non-dyadic constants carry one rounding, hence the floor
    assert bmo_norm(c).value < 1e-13 * abs(3.1 - 0.2j)
    assert morrey_norm(c, 0.5).value < 1e-13 * abs(3.1 - 0.2j)
    assert qalpha_norm(c, 0.5).value == 0.0
    assert sobolev_seminorm(c, 0.5, "fourier") == 0.0
    assert sobolev_seminorm(c, 0.5, "real-space") < 1e-13 * abs(3.1 - 0.2j)
    for kind in ("poisson-derivative", "heat-gradient", "morrey-poisson"):
        assert carleson_functional(c, 0.5, kind).value < 1e-13


def test_absolute_homogeneity(grid2):
    f = band_limited_field(grid2, make_rng(55), kmax=4)
    c = 2.0  # exact scaling in floating point
    for norm in (
        lambda g: bmo_norm(g).value,
        lambda g: qalpha_norm(g, 0.5).value,
        lambda g: morrey_norm(g, 0.3).value,
        lambda g: qinv_norm(g, 0.5).value,
    ):
        assert norm(f * c) == pytest.approx(c * norm(f), rel=1e-12)


def test_alpha_range_errors(grid2):
    f = random_field(grid2, make_rng(56))
    with pytest.raises(AlphaOutOfRange):
        qalpha_norm(f, 0.0)
    with pytest.raises(AlphaOutOfRange):
        qalpha_norm(f, 1.0)
    with pytest.raises(AlphaOutOfRange):
        morrey_norm(f, -0.1)
    with pytest.raises(AlphaOutOfRange):
        sobolev_seminorm(f, 1.2)


def test_bmo_translation_invariance(grid2):
    L = grid2.L
    f = ScalarField.from_function(grid2, lambda x, y: np.sin(2 * np.pi * x / L))
    shift = grid2.N // 8  # respects the default center sublattice
    g = ScalarField(grid2, np.roll(f.values, shift, axis=0))
    assert bmo_norm(g).value == pytest.approx(bmo_norm(f).value, rel=1e-12)


def test_morrey_alpha_zero_is_bmo_bitwise(grid2):
    f = random_field(grid2, make_rng(57))
    assert morrey_norm(f, 0.0).value == bmo_norm(f).value


def test_morrey_weight_wiring(grid2):
    # per window the alpha-weight differs from the flat one by ell^alpha,
    # so the ratio grows with the window size exactly as the exponent predicts
    f = random_field(grid2, make_rng(77))
    alpha = 0.5
    m = morrey_norm(f, alpha)
    b = bmo_norm(f)
    for wm, wb in zip(m.windows, b.windows):
        assert wm.center == wb.center and wm.radius == wb.radius
        ell = 2.0 * wm.radius
        if wb.value > 0:
            assert wm.value / wb.value == pytest.approx(ell**alpha, rel=1e-12)


def test_qinv_monotone_in_horizon(grid2):
    f = band_limited_field(grid2, make_rng(58), kmax=4)
    vals = vanishing_check(f, 0.5, [10.0, grid2.L / 3, grid2.L / 7])
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_qinv_no_window_below_T(grid2):
    f = band_limited_field(grid2, make_rng(59), kmax=2)
    with pytest.raises(NoWindowBelowT):
        qinv_norm(f, 0.5, T=grid2.L / 100)


def test_vanishing_check_drops_for_smooth_field(grid2):
    f = band_limited_field(grid2, make_rng(60), kmax=2)
    seq = [grid2.L, grid2.L / 3, grid2.L / 6]  # smallest still admits radius L/8
    vals = vanishing_check(f, 0.5, seq)
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    assert vals[-1] < vals[0]


def test_per_window_weight_domination_exact(grid2):
    f = band_limited_field(grid2, make_rng(61), kmax=4)
    pairs = carleson_weight_domination(f, 0.5)
    assert pairs
    for flat2, alpha2, w in pairs:
        assert flat2 <= alpha2 * (1 + 1e-12)


def test_zero_field_qinv(grid2):
    z = ScalarField.zeros(grid2)
    assert qinv_norm(z, 0.5).value == 0.0


# ---------------------------------------------------------------------------
# dilation invariance: exact window rescaling
# ---------------------------------------------------------------------------


def test_qalpha_dilation_invariance(grid2):
    f = band_limited_field(grid2, make_rng(62), kmax=4)
    lam = 2
    base, image = dilation_pair_families(grid2, lam, "cube", pair_sum=True)
    g = dilate(f, lam)
    v_dilated = qalpha_norm(g, 0.5, base).value
    v_original = qalpha_norm(f, 0.5, image).value
    assert v_dilated == pytest.approx(v_original, rel=1e-10)


def test_qinv_dilation_invariance(grid2):
    f = band_limited_field(grid2, make_rng(63), kmax=4)
    lam = 2
    base, image = dilation_pair_families(grid2, lam, "ball")
    g = dilate(f, lam) * float(lam)
    v_dilated = qinv_norm(g, 0.5, windows=base).value
    v_original = qinv_norm(f, 0.5, windows=image).value
    assert v_dilated == pytest.approx(v_original, rel=1e-8)


def test_morrey_dilation_invariance_alpha_zero(grid2):
    f = band_limited_field(grid2, make_rng(64), kmax=4)
    base, image = dilation_pair_families(grid2, 2, "cube")
    assert bmo_norm(dilate(f, 2), base).value == pytest.approx(
        bmo_norm(f, image).value, rel=1e-10
    )


# ---------------------------------------------------------------------------
# Carleson functional kinds
# ---------------------------------------------------------------------------


def test_generic_psi_recovers_poisson_derivative(grid2):
    # psi with symbol -2 pi |xi| e^{-2 pi |xi|}: psi_t * f = t * d/dt P_t f,
    # so the generic weight t^{-(1+2a)} reproduces the t^{1-2a} derivative form
    f = band_limited_field(grid2, make_rng(65), kmax=3)

    def symbol(*xi):
        rad = np.sqrt(sum(np.asarray(x) ** 2 for x in xi))
        return -2.0 * np.pi * rad * np.exp(-2.0 * np.pi * rad)

    a = carleson_functional(f, 0.4, "generic-psi", symbol=symbol)
    b = carleson_functional(f, 0.4, "poisson-derivative")
    assert a.value == pytest.approx(b.value, rel=1e-10)


def test_poisson_derivative_dilation_invariance(grid2):
    # change-of-variables oracle: value at (x, r) for f(lam .) equals value at
    # (lam x, lam r) for f
    f = band_limited_field(grid2, make_rng(66), kmax=4)
    base, image = dilation_pair_families(grid2, 2, "ball")
    g = dilate(f, 2)
    v1 = carleson_functional(g, 0.5, "poisson-derivative", windows=base).value
    v2 = carleson_functional(f, 0.5, "poisson-derivative", windows=image).value
    assert v1 == pytest.approx(v2, rel=1e-8)


def test_heat_gradient_poisson_derivative_comparable(grid2):
    rng = make_rng(67)
    ratios = []
    for _ in range(20):
        f = band_limited_field(grid2, rng, kmax=4)
        a = carleson_functional(f, 0.5, "heat-gradient").value
        b = carleson_functional(f, 0.5, "poisson-derivative").value
        ratios.append(a / b)
    assert 0.1 < min(ratios) and max(ratios) < 10.0


# ---------------------------------------------------------------------------
# trajectory norm
# ---------------------------------------------------------------------------


def test_x_norm_zero_trajectory(grid2):
    traj = heat_extension(ScalarField.zeros(grid2), np.linspace(0, 0.5, 9))
    assert x_norm(traj, 0.5) == 0.0


def test_x_norm_dominates_carleson_part(grid2):
    f = band_limited_field(grid2, make_rng(68), kmax=4)
    traj = heat_extension(f, np.linspace(0, 0.5, 33))
    total, sup_term, carleson = x_norm(traj, 0.5, parts=True)
    assert total == pytest.approx(sup_term + carleson)
    assert total >= carleson


def test_x_norm_parabolic_scaling(grid2):
    # g_lam(t, x) = lam g(lam^2 t, lam x) built from dilated initial data;
    # maxima of axis-separable sine data stay on the coarse sublattice
    L = grid2.L
    lam = 2
    f = ScalarField.from_function(
        grid2,
        lambda x, y: np.sin(2 * np.pi * x / L) + 0.5 * np.sin(4 * np.pi * y / L),
    )
    T = 0.4
    M = 32
    times = np.linspace(0.0, T, M + 1)
    traj = heat_extension(f, times)
    f_lam = dilate(f, lam) * float(lam)
    traj_lam = heat_extension(f_lam, times / lam**2)
    alpha = 0.5
    radii_lam = xnorm_radii(grid2, T / lam**2)
    base = WindowFamily.build(grid2, "ball", radii=radii_lam)
    image = base.image(lam)
    v_lam = x_norm(traj_lam, alpha, T=T / lam**2, windows=base)
    v = x_norm(traj, alpha, T=T, windows=image)
    assert v_lam == pytest.approx(v, rel=1e-8)


# ---------------------------------------------------------------------------
# Sobolev seminorm
# ---------------------------------------------------------------------------


def test_sobolev_fourier_scaling_per_mode(grid2):
    # torus dilation transplants modes, so the energy scales by lam^alpha;
    # the affine rule lam^{alpha - n/2} is recovered after the lam^{-n/2}
    # mass normalization of the non-compact dilation
    f = band_limited_field(grid2, make_rng(69), kmax=4)
    alpha = 0.5
    lam = 2
    a = sobolev_seminorm(dilate(f, lam), alpha, "fourier")
    b = sobolev_seminorm(f, alpha, "fourier")
    assert a == pytest.approx(lam**alpha * b, rel=1e-12)


def gaussian_bump_field(grid, sigma):
    N, L = grid.N, grid.L
    k = np.fft.fftfreq(N, d=1.0 / N)
    meshes = np.meshgrid(*([k] * grid.n), indexing="ij")
    xi2 = sum(m**2 for m in meshes) / L**2
    phase = sum(meshes) * 0.5
    spec = np.exp(-2 * np.pi**2 * sigma**2 * xi2) * np.exp(-2j * np.pi * phase)
    spec[(0,) * grid.n] = 0.0
    return ScalarField(grid, np.fft.ifftn(spec * grid.size / grid.volume))


def test_sobolev_two_sided_agreement():
    # band-limited gaussian bump; L doubled twice at fixed h controls the tail
    sigma = 0.5
    errs = []
    for scale in (1, 2, 4):
        grid = Grid(n=2, N=32 * scale, L=np.pi / 2 * scale)
        f = gaussian_bump_field(grid, sigma)
        fr = sobolev_seminorm(f, 0.5, "fourier")
        rs = sobolev_seminorm(f, 0.5, "real-space")
        assert sobolev_far_tail_estimate(f, 0.5) > 0
        errs.append(abs(rs - fr) / fr)
    assert errs[-1] <= 0.02
