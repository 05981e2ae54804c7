"""Command-line client for the compute service.

Every subcommand builds a request, sends it to the service (in-process by
default, or a remote instance via --server), and writes the response as
JSON/CSV files with a one-line summary on stdout.  Exit codes: 0 success,
2 validation failure, 1 numerical error.
"""

from __future__ import annotations

import argparse
import base64
import sys

from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .reports import csv_text, json_dumps


class ServiceClient:
    """Thin HTTP client; in-process ASGI transport unless --server is given."""

    def __init__(self, server: str = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=3600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette's in-process client warns about its own httpx pin
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

                from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict):
        return self._client.post(path, json=payload)


def _fail(message: str, code: int):
    print(message, file=sys.stderr)
    return code


def _call(client, path, payload):
    """POST and translate HTTP status to the CLI error contract."""
    resp = client.post(path, payload)
    if resp.status_code == 200:
        return resp.json(), 0
    body = resp.json() if resp.headers.get("content-type", "").startswith("application/json") else {}
    message = body.get("error") or body.get("detail") or resp.text
    if resp.status_code in (400, 422):
        return None, _fail(f"validation error: {message}", 2)
    return None, _fail(f"numerical error: {message}", 1)


def _resolved(args, extra=None) -> ExperimentConfig:
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {
        "alpha": getattr(args, "alpha", None),
        "T": getattr(args, "T", None),
        "n": getattr(args, "n", None),
        "N": getattr(args, "N", None),
        "L": getattr(args, "L", None),
        "seed": getattr(args, "seed", None),
        "threads": getattr(args, "threads", None),
        "steps": getattr(args, "steps", None),
        "tolerance": getattr(args, "tolerance", None),
        "max_iterations": getattr(args, "max_iterations", None),
        "quad_nodes": getattr(args, "quad_nodes", None),
    }
    if getattr(args, "dealias", None) is not None:
        overrides["dealias"] = args.dealias
    if extra:
        overrides.update(extra)
    return ExperimentConfig.resolve(file_values, overrides)


def _grid_payload(cfg: ExperimentConfig) -> dict:
    return {"n": cfg["n"], "N": cfg["N"], "L": cfg["L"]}


def _solver_payload(cfg: ExperimentConfig) -> dict:
    return {
        "alpha": cfg["alpha"],
        "T": cfg["T"],
        "steps": cfg["steps"],
        "tolerance": cfg["tolerance"],
        "max_iterations": cfg["max_iterations"],
        "dealias": cfg["dealias"],
        "quad_nodes": cfg["quad_nodes"],
    }


def _read_field_b64(path: str) -> str:
    with open(path, "rb") as fh:
        return base64.b64encode(fh.read()).decode("ascii")


def _write_json(path, obj):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json_dumps(obj))


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def cmd_gen(args, client):
    cfg = _resolved(args)
    kind = args.kind or cfg.get("kind") or "band-limited"
    payload = {
        "kind": kind,
        "grid": _grid_payload(cfg),
        "seed": cfg["seed"],
        "kmax": args.kmax if args.kmax is not None else cfg.get("kmax", 4),
        "amplitude": args.amplitude
        if args.amplitude is not None
        else cfg.get("amplitude", 1.0),
        "alpha": cfg["alpha"],
    }
    if args.sigma is not None:
        payload["sigma"] = args.sigma
    if args.normalize is not None:
        payload["normalize"] = args.normalize
    body, code = _call(client, "/fields/generate", payload)
    if code:
        return code
    data = base64.b64decode(body["field_b64"])
    out = args.out or "field.qafld"
    with open(out, "wb") as fh:
        fh.write(data)
    meta = body["meta"]
    print(
        f"gen: kind={kind} n={meta['n']} N={meta['N']} L={meta['L']} "
        f"seed={meta['seed']} components={meta['components']} -> {out}"
    )
    return 0


def cmd_norm(args, client):
    cfg = _resolved(args)
    if not args.infile:
        return _fail("validation error: --in is required for norm", 2)
    payload = {
        "field_b64": _read_field_b64(args.infile),
        "kind": args.kind,
        "alpha": cfg["alpha"],
        "quad_nodes": cfg["quad_nodes"],
        "window": {
            "center_stride": cfg.get("center_stride"),
            "resolution": cfg.get("resolution", 16),
        },
    }
    if args.T is not None:
        payload["T"] = args.T
    if args.component is not None:
        payload["component"] = args.component
    body, code = _call(client, "/norms/evaluate", payload)
    if code:
        return code
    sys.stdout.write(json_dumps(body))
    _write_json(args.out, body)
    if args.csv:
        header = ["cx", "cy", "cz", "r", "value"]
        rows = [
            [w["cx"], w["cy"], w["cz"], w["r"], w["value"]] for w in body["windows"]
        ]
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text(header, rows))
    return 0


def _parse_pairs(raw: str):
    pairs = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            n, alpha = part.split(":")
            pairs.append((int(n), float(alpha)))
        except ValueError:
            raise ConfigError("pairs", f"expected n:alpha, got {part!r}") from None
    return pairs


def cmd_embed_check(args, client):
    cfg = _resolved(args)
    payload = {
        "pairs": _parse_pairs(args.pairs),
        "grid": _grid_payload(cfg),
        "seed": cfg["seed"],
        "corpus_size": args.corpus,
        "include_field_checks": not args.constants_only,
    }
    body, code = _call(client, "/embeddings/check", payload)
    if code:
        return code
    _write_json(args.out, body)
    if args.csv:
        header = [
            "n",
            "alpha",
            "constant",
            "bare_composition",
            "tau",
            "c_integral",
            "c_integral_error",
            "extremal_ratio",
            "extremal_over_constant",
            "gaussian_over_constant",
        ]
        rows = [[c[h] for h in header] for c in body["constants"]]
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text(header, rows))
    worst = max(abs(c["extremal_over_constant"] - 1.0) for c in body["constants"])
    print(
        f"embed-check: {len(body['constants'])} (n, alpha) pairs, "
        f"max |extremal/constant - 1| = {worst:.3e}"
        + (" (+field checks)" if "field_checks" in body else "")
    )
    return 0


def cmd_kernel_check(args, client):
    cfg = _resolved(args)
    payload = {
        "alphas": [float(x) for x in args.alphas.split(",") if x.strip()],
        "grid": _grid_payload(cfg),
        "seed": cfg["seed"],
        "corpus_size": args.corpus,
        "schur_alphas": args.schur_points,
        "freqs": args.schur_points,
        "times": args.schur_points,
        "quad_nodes": cfg["quad_nodes"],
    }
    body, code = _call(client, "/kernels/check", payload)
    if code:
        return code
    _write_json(args.out, body)
    if args.csv:
        header = ["alpha", "freq", "t", "row_sum", "row_bound", "col_sum", "col_bound"]
        rows = [[r[h] for h in header] for r in body["schur_rows"]]
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text(header, rows))
    print(
        f"kernel-check: row excess {body['max_row_excess']:.3e}, "
        f"col excess {body['max_col_excess']:.3e}, "
        f"regularity ratio {body['maximal_regularity_ratio_max']:.3f}, "
        f"smoothing ratio {body['smoothing_ratio_max']:.3f}"
    )
    return 0


def cmd_ns_run(args, client):
    cfg = _resolved(args)
    payload = {
        "grid": _grid_payload(cfg),
        "solver": _solver_payload(cfg),
        "kind": args.kind or cfg.get("kind") or "taylor-green",
        "seed": cfg["seed"],
        "kmax": cfg.get("kmax", 3),
        "amplitude": args.amplitude
        if args.amplitude is not None
        else cfg.get("amplitude", 1.0),
        "return_final_slice": args.final_slice is not None,
    }
    if args.infile:
        payload["field_b64"] = _read_field_b64(args.infile)
    if args.eps is not None:
        payload["eps"] = args.eps
    body, code = _call(client, "/ns/run", payload)
    if code:
        return code
    _write_json(args.out, body)
    if args.final_slice and "final_slice_b64" in body:
        with open(args.final_slice, "wb") as fh:
            fh.write(base64.b64decode(body["final_slice_b64"]))
    d = body["diagnostics"]
    print(
        f"ns-run: converged={d['converged']} iterations={d['iterations']} "
        f"residual={d['residual']:.3e} admission={d['admission_norm']:.6g}"
    )
    return 0


def cmd_ns_sweep(args, client):
    cfg = _resolved(args)
    amplitudes = [float(x) for x in args.amplitudes.split(",") if x.strip()]
    payload = {
        "grid": _grid_payload(cfg),
        "solver": _solver_payload(cfg),
        "seed": cfg["seed"],
        "kmax": cfg.get("kmax", 3),
        "amplitudes": amplitudes,
    }
    body, code = _call(client, "/ns/sweep", payload)
    if code:
        return code
    header = [
        "amplitude",
        "admission_norm",
        "converged",
        "iterations",
        "final_ratio",
        "final_xnorm",
    ]
    rows = [[r[h] for h in header] for r in body["rows"]]
    out = args.out or "sweep.csv"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(header, rows))
    converged = sum(1 for r in body["rows"] if r["converged"])
    print(f"ns-sweep: {converged}/{len(body['rows'])} amplitudes converged -> {out}")
    return 0


def cmd_scale_check(args, client):
    cfg = _resolved(args)
    payload = {
        "grid": _grid_payload(cfg),
        "solver": _solver_payload(cfg),
        "kind": args.kind or cfg.get("kind") or "taylor-green",
        "seed": cfg["seed"],
        "amplitude": args.amplitude
        if args.amplitude is not None
        else cfg.get("amplitude", 1.0),
        "lam": args.lam if args.lam is not None else cfg.get("lam", 2),
    }
    if args.infile:
        payload["field_b64"] = _read_field_b64(args.infile)
    body, code = _call(client, "/ns/scale-check", payload)
    if code:
        return code
    _write_json(args.out, body)
    print(
        f"scale-check: lambda={body['lambda']} slice error={body['max_slice_error']:.3e} "
        f"admission match={body['admission_match']:.3e}"
    )
    return 0


def cmd_serve(args, client):
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="worker cap (runs are single-threaded and deterministic)")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--server", default=None, help="remote service URL; in-process when omitted")
    p.add_argument("--out", default=None, help="output file")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qflow",
        description="Carleson-norm and mild Navier-Stokes experiments on the torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic field file")
    _add_common(p)
    p.add_argument("--kind", default=None)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--normalize", default=None)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("norm", help="evaluate a norm or Carleson functional on a field file")
    _add_common(p)
    p.add_argument("--kind", default="qalpha")
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--component", type=int, default=None)
    p.add_argument("--quad-nodes", dest="quad_nodes", type=int, default=None)
    p.add_argument("--csv", default=None, help="per-window CSV output")
    p.set_defaults(handler=cmd_norm)

    p = sub.add_parser("embed-check", help="sharp-constant and embedding checks")
    _add_common(p)
    p.add_argument("--pairs", default="2:0.3,2:0.5,3:0.5", help="comma list of n:alpha")
    p.add_argument("--corpus", type=int, default=5)
    p.add_argument("--constants-only", action="store_true")
    p.add_argument("--csv", default=None, help="constants table CSV")
    p.set_defaults(handler=cmd_embed_check)

    p = sub.add_parser("kernel-check", help="Schur bounds and smoothing inequalities")
    _add_common(p)
    p.add_argument("--alphas", default="0.25,0.5,0.75")
    p.add_argument("--corpus", type=int, default=10)
    p.add_argument("--schur-points", dest="schur_points", type=int, default=10)
    p.add_argument("--quad-nodes", dest="quad_nodes", type=int, default=None)
    p.add_argument("--csv", default=None, help="Schur sum rows CSV")
    p.set_defaults(handler=cmd_kernel_check)

    p = sub.add_parser("ns-run", help="Picard-iterate the mild equation")
    _add_common(p)
    p.add_argument("--kind", default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--in", dest="infile", default=None, help="vector field file")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-iterations", dest="max_iterations", type=int, default=None)
    p.add_argument("--quad-nodes", dest="quad_nodes", type=int, default=None)
    p.add_argument("--no-dealias", dest="dealias", action="store_false", default=None)
    p.add_argument("--final-slice", default=None, help="write final slice field file")
    p.set_defaults(handler=cmd_ns_run)

    p = sub.add_parser("ns-sweep", help="amplitude sweep of the Picard iteration")
    _add_common(p)
    p.add_argument("--amplitudes", default="1e-3,1e-2,1e-1")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--quad-nodes", dest="quad_nodes", type=int, default=None)
    p.set_defaults(handler=cmd_ns_sweep)

    p = sub.add_parser("scale-check", help="parabolic-rescaling consistency of the solver")
    _add_common(p)
    p.add_argument("--kind", default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--lam", type=int, default=None)
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--steps", type=int, default=None)
    p.set_defaults(handler=cmd_scale_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        client = None if args.command == "serve" else ServiceClient(getattr(args, "server", None))
        return args.handler(args, client)
    except ConfigError as exc:
        return _fail(f"validation error: {exc}", 2)
    except FileNotFoundError as exc:
        return _fail(f"validation error: {exc}", 2)


if __name__ == "__main__":
    sys.exit(main())
