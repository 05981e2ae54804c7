"""FastAPI service wrapping the core package.

Field payloads travel inline as base64 QAFLD1 blobs, so the service never
touches the client filesystem.  Domain errors map to 422 (bad request
content) and numerical failures to 500.
"""

from __future__ import annotations

import base64

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__, corpus, qafld
from ..errors import ConfigError, NumericalBlowup, QflowError
from ..fields import Grid, ScalarField, VectorField
from ..norms import (
    bmo_norm,
    carleson_functional,
    morrey_norm,
    qalpha_norm,
    qinv_norm,
    sobolev_seminorm,
)
from ..windows import TimeQuadrature, WindowFamily
from . import schemas

NORM_KINDS = (
    "bmo",
    "morrey",
    "qalpha",
    "qinv",
    "poisson-derivative",
    "heat-gradient",
    "morrey-poisson",
    "sobolev-fourier",
    "sobolev-real",
)


def _decode_field(b64: str):
    return qafld.load_bytes(base64.b64decode(b64))


def _encode_field(field) -> str:
    return base64.b64encode(qafld.dump_bytes(field)).decode("ascii")


def _grid(spec: schemas.GridSpec) -> Grid:
    try:
        return Grid(n=spec.n, N=spec.N, L=spec.L)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None


def _window_family(grid, geometry, overrides: schemas.WindowOverrides):
    return WindowFamily.build(
        grid,
        geometry,
        radii=overrides.radii,
        center_stride=overrides.center_stride,
        resolution=overrides.resolution,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="qflow", version=__version__)

    @app.exception_handler(QflowError)
    async def _domain_error(request, exc):
        if isinstance(exc, NumericalBlowup):
            return JSONResponse(status_code=500, content={"error": str(exc)})
        return JSONResponse(
            status_code=422, content={"error": f"{type(exc).__name__}: {exc}"}
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/fields/generate")
    def generate(req: schemas.GenerateRequest):
        grid = _grid(req.grid)
        params = {
            "kmax": req.kmax,
            "amplitude": req.amplitude,
            "normalize": req.normalize,
            "alpha": req.alpha,
        }
        if req.sigma is not None:
            params["sigma"] = req.sigma
        if req.k is not None:
            params["k"] = tuple(req.k)
        if req.wavenumbers is not None:
            params["wavenumbers"] = tuple(req.wavenumbers)
        if req.amplitudes is not None:
            params["amplitudes"] = tuple(req.amplitudes)
        field = corpus.generate(req.kind, grid, seed=req.seed, **params)
        components = 1 if isinstance(field, ScalarField) else grid.n
        return {
            "field_b64": _encode_field(field),
            "kind": req.kind,
            "meta": {
                "n": grid.n,
                "N": grid.N,
                "L": grid.L,
                "seed": req.seed,
                "components": components,
            },
        }

    @app.post("/norms/evaluate")
    def evaluate_norm(req: schemas.NormRequest):
        from ..errors import UnknownKind

        field = _decode_field(req.field_b64)
        if isinstance(field, VectorField):
            if req.component is None:
                raise ConfigError("component", "vector payload needs a component index")
            field = field[req.component]
        grid = field.grid
        quad = TimeQuadrature(nodes=req.quad_nodes)
        kind = req.kind
        if kind == "bmo":
            report = bmo_norm(field, _window_family(grid, "cube", req.window))
        elif kind == "morrey":
            report = morrey_norm(field, req.alpha, _window_family(grid, "cube", req.window))
        elif kind == "qalpha":
            report = qalpha_norm(field, req.alpha, _window_family(grid, "cube", req.window))
        elif kind == "qinv":
            report = qinv_norm(
                field,
                req.alpha,
                T=req.T,
                windows=_window_family(grid, "ball", req.window),
                quadrature=quad,
            )
        elif kind in ("poisson-derivative", "heat-gradient", "morrey-poisson"):
            report = carleson_functional(
                field,
                req.alpha,
                kind,
                windows=_window_family(grid, "ball", req.window),
                quadrature=quad,
            )
        elif kind in ("sobolev-fourier", "sobolev-real"):
            side = "fourier" if kind == "sobolev-fourier" else "real-space"
            value = sobolev_seminorm(field, req.alpha, side)
            return {
                "value": value,
                "alpha": req.alpha,
                "T": None,
                "windows": [],
                "meta": {"kind": kind},
            }
        else:
            raise UnknownKind(f"kind must be one of {NORM_KINDS}, got {kind!r}")
        return report.json_dict()

    @app.post("/embeddings/check")
    def embeddings_check(req: schemas.EmbedCheckRequest):
        from .. import embeddings

        constants = []
        for n, alpha in req.pairs:
            rep = embeddings.sharp_sobolev_constant(int(n), float(alpha))
            ratio, err = embeddings.extremal_ratio(int(n), float(alpha))
            gauss = embeddings.gaussian_ratio(int(n), float(alpha))
            d = rep.json_dict()
            d["extremal_ratio"] = ratio
            d["extremal_ratio_error"] = err
            d["extremal_over_constant"] = ratio / rep.constant
            d["gaussian_over_constant"] = gauss / rep.constant
            constants.append(d)
        out = {"constants": constants}
        if req.include_field_checks:
            grid = _grid(req.grid)
            alpha = float(req.pairs[0][1]) if req.pairs else 0.5
            bmo_ratios, iso_ratios, poisson_rel = [], [], []
            div_residuals = []
            for i in range(req.corpus_size):
                f = corpus.band_limited_field(grid, req.seed, kmax=4, stream=i)
                r, bound = embeddings.bmo_bound_check(f, alpha)
                bmo_ratios.append(r)
                iso_ratios.append(embeddings.isomorphism_check(f, alpha))
                lhs, rhs = embeddings.poisson_energy_identity(f, alpha)
                poisson_rel.append(abs(lhs - rhs) / rhs)
                _, resid = embeddings.divergence_representation(f)
                div_residuals.append(resid)
            out["field_checks"] = {
                "alpha": alpha,
                "corpus_size": req.corpus_size,
                "bmo_ratio_max": max(bmo_ratios),
                "bmo_bound": bound,
                "isomorphism_ratio_min": min(iso_ratios),
                "isomorphism_ratio_max": max(iso_ratios),
                "poisson_identity_max_rel": max(poisson_rel),
                "divergence_residual_max": max(div_residuals),
            }
        return out

    @app.post("/kernels/check")
    def kernels_check(req: schemas.KernelCheckRequest):
        from .. import kernels
        from ..spacetime import SpaceTimeField

        rows = []
        worst_row, worst_col = -np.inf, -np.inf
        alphas = np.linspace(0.05, 0.95, req.schur_alphas)
        freqs = np.geomspace(0.1, 30.0, req.freqs)
        ts = np.geomspace(1e-3, 30.0, req.times)
        for a in alphas:
            for z in freqs:
                spec = kernels.SchurKernelSpec(alpha=float(a), freq=float(z))
                for t in ts:
                    row = kernels.schur_row_sum(spec, float(t))
                    col = kernels.schur_col_sum(spec, float(t))
                    row_bound = float(-np.expm1(-t * z * z))
                    rows.append(
                        {
                            "alpha": float(a),
                            "freq": float(z),
                            "t": float(t),
                            "row_sum": row,
                            "row_bound": row_bound,
                            "col_sum": col,
                            "col_bound": 1.0,
                        }
                    )
                    worst_row = max(worst_row, row - row_bound)
                    worst_col = max(worst_col, col - 1.0)
        grid = _grid(req.grid)
        rng = corpus.make_rng(req.seed)
        reg_max, smo_max = 0.0, 0.0
        for alpha in req.alphas:
            t, _ = kernels.gauss_jacobi_times(1.0, alpha, req.quad_nodes)
            for i in range(req.corpus_size):
                base = [
                    corpus.band_limited_field(grid, req.seed, kmax=4, stream=100 + i + j)
                    for j in range(2)
                ]
                rates = rng.uniform(0.0, 3.0, size=2)
                vals = sum(
                    np.exp(-r * t).reshape((-1,) + (1,) * grid.n) * b.values[None]
                    for r, b in zip(rates, base)
                )
                traj = SpaceTimeField(grid, t, vals)
                _, _, ratio = kernels.maximal_regularity_check(traj, alpha)
                reg_max = max(reg_max, ratio)
                center = rng.uniform(0, grid.L, size=grid.n)
                width = rng.uniform(0.1 * grid.L / 4, 0.2 * grid.L)
                meshes = grid.meshes()
                d2 = sum(
                    np.minimum(np.abs(m - c), grid.L - np.abs(m - c)) ** 2
                    for m, c in zip(meshes, center)
                )
                bump = np.exp(-d2 / (2 * width**2))
                profile = 1.0 + 0.5 * np.sin(3.0 * t + rng.random())
                btraj = SpaceTimeField(
                    grid, t, profile.reshape((-1,) + (1,) * grid.n) * bump[None]
                )
                _, _, sratio = kernels.smoothing_inequality_check(btraj, alpha)
                smo_max = max(smo_max, sratio)
        return {
            "schur_rows": rows,
            "max_row_excess": worst_row,
            "max_col_excess": worst_col,
            "maximal_regularity_ratio_max": reg_max,
            "smoothing_ratio_max": smo_max,
        }

    def _initial_data(grid, req) -> VectorField:
        if req.field_b64 is not None:
            field = _decode_field(req.field_b64)
            if isinstance(field, ScalarField):
                raise ConfigError("field_b64", "initial data must be a vector field")
            if isinstance(field, tuple):
                raise ConfigError("field_b64", "component count must equal n")
            if field.grid != grid:
                raise ConfigError("field_b64", "field grid differs from requested grid")
            return field
        if req.kind == "taylor-green":
            return corpus.taylor_green(grid, amplitude=req.amplitude)
        if req.kind == "solenoidal":
            v = corpus.solenoidal_field(grid, req.seed, kmax=req.kmax)
            return v * req.amplitude
        raise ConfigError("kind", f"unknown initial-data kind {req.kind!r}")

    def _solver_config(grid, spec: schemas.SolverSpec):
        from ..solver import SolverConfig

        try:
            return SolverConfig(
                grid=grid,
                alpha=spec.alpha,
                T=spec.T,
                steps=spec.steps,
                tolerance=spec.tolerance,
                max_iterations=spec.max_iterations,
                dealias=spec.dealias,
                quadrature_nodes=spec.quad_nodes,
            )
        except ValueError as exc:
            raise ConfigError("solver", str(exc)) from None

    @app.post("/ns/run")
    def ns_run(req: schemas.NsRunRequest):
        from ..solver import admission_check, picard_solve

        grid = _grid(req.grid)
        cfg = _solver_config(grid, req.solver)
        a = _initial_data(grid, req)
        u, diags = picard_solve(a, cfg)
        out = {"diagnostics": diags.json_dict()}
        out["admission"] = admission_check(a, cfg.alpha, cfg.T, eps=req.eps)
        if req.return_final_slice:
            out["final_slice_b64"] = _encode_field(u.slice(len(u) - 1))
        return out

    @app.post("/ns/sweep")
    def ns_sweep(req: schemas.NsSweepRequest):
        from ..solver import contraction_sweep

        grid = _grid(req.grid)
        cfg = _solver_config(grid, req.solver)
        unit = corpus.solenoidal_field(
            grid, req.seed, kmax=req.kmax, normalize="qinv", alpha=cfg.alpha
        )
        rows = contraction_sweep(unit, req.amplitudes, cfg)
        return {"rows": rows}

    @app.post("/ns/scale-check")
    def ns_scale_check(req: schemas.ScaleCheckRequest):
        from ..solver import scaling_experiment

        grid = _grid(req.grid)
        cfg = _solver_config(grid, req.solver)
        a = _initial_data(grid, req)
        return scaling_experiment(a, req.lam, cfg)

    return app


app = create_app()
