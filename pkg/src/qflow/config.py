"""Flat key=value experiment configuration with CLI-flag overrides.

A config file is plain text: one `key = value` per line, '#' comments.
Parsing is strict: unknown keys or malformed values abort before any
computation, naming the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

_SCHEMA = {
    "n": int,
    "N": int,
    "L": float,
    "alpha": float,
    "T": float,
    "seed": int,
    "threads": int,
    "steps": int,
    "tolerance": float,
    "max_iterations": int,
    "dealias": bool,
    "quad_nodes": int,
    "center_stride": int,
    "resolution": int,
    "xnorm_levels": int,
    "kind": str,
    "kmax": int,
    "amplitude": float,
    "sigma": float,
    "normalize": str,
    "amplitudes": str,  # comma-separated floats
    "lam": int,
    "eps": float,
    "in": str,
    "out": str,
    "components": int,
}

_DEFAULTS = {
    "n": 2,
    "N": 32,
    "L": 6.283185307179586,
    "alpha": 0.5,
    "T": 0.1,
    "seed": 0,
    "threads": 1,
    "steps": 128,
    "tolerance": 1e-10,
    "max_iterations": 30,
    "dealias": True,
    "quad_nodes": 32,
    "xnorm_levels": 4,
}


def _coerce(key: str, raw: str):
    if key not in _SCHEMA:
        raise ConfigError(key, "unknown key")
    typ = _SCHEMA[key]
    raw = raw.strip()
    try:
        if typ is bool:
            if raw.lower() in ("1", "true", "on", "yes"):
                return True
            if raw.lower() in ("0", "false", "off", "no"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {typ.__name__}") from None


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {body!r}")
        key, raw = body.split("=", 1)
        out[key.strip()] = _coerce(key.strip(), raw)
    return out


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


@dataclass
class ExperimentConfig:
    """Resolved configuration: defaults, then file, then explicit overrides."""

    values: dict = field(default_factory=dict)

    @classmethod
    def resolve(cls, file_values: dict = None, overrides: dict = None):
        values = dict(_DEFAULTS)
        for source in (file_values or {}, overrides or {}):
            for k, v in source.items():
                if v is None:
                    continue
                if k not in _SCHEMA:
                    raise ConfigError(k, "unknown key")
                values[k] = v
        cfg = cls(values)
        cfg.validate()
        return cfg

    def validate(self):
        v = self.values
        if v["n"] not in (2, 3):
            raise ConfigError("n", f"must be 2 or 3, got {v['n']}")
        N = v["N"]
        if N < 8 or (N & (N - 1)) != 0:
            raise ConfigError("N", f"must be a power of two >= 8, got {N}")
        if not v["L"] > 0:
            raise ConfigError("L", f"must be positive, got {v['L']}")
        if not 0 < v["alpha"] < 1:
            raise ConfigError("alpha", f"must be in (0, 1), got {v['alpha']}")
        if not v["T"] > 0:
            raise ConfigError("T", f"must be positive, got {v['T']}")
        if v["threads"] < 1:
            raise ConfigError("threads", "must be >= 1")
        if v["seed"] < 0:
            raise ConfigError("seed", "must be >= 0")

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def amplitudes_list(self):
        raw = self.values.get("amplitudes")
        if raw is None:
            return [1e-3, 1e-2, 1e-1]
        try:
            return [float(x) for x in str(raw).split(",") if x.strip()]
        except ValueError:
            raise ConfigError("amplitudes", f"cannot parse {raw!r}") from None
