"""Pydantic request/response models for the compute service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class GridSpec(BaseModel):
    n: int = 2
    N: int = 32
    L: float = 6.283185307179586


class GenerateRequest(BaseModel):
    kind: str = "band-limited"
    grid: GridSpec = Field(default_factory=GridSpec)
    seed: int = 0
    kmax: int = 4
    amplitude: float = 1.0
    sigma: Optional[float] = None
    normalize: Optional[str] = None
    alpha: float = 0.5
    k: Optional[list[int]] = None
    wavenumbers: Optional[list[int]] = None
    amplitudes: Optional[list[float]] = None


class FieldPayload(BaseModel):
    field_b64: str
    kind: str
    meta: dict[str, Any] = Field(default_factory=dict)


class WindowOverrides(BaseModel):
    center_stride: Optional[int] = None
    radii: Optional[list[float]] = None
    resolution: int = 16


class NormRequest(BaseModel):
    field_b64: str
    kind: str = "qalpha"
    alpha: float = 0.5
    T: Optional[float] = None
    quad_nodes: int = 32
    window: WindowOverrides = Field(default_factory=WindowOverrides)
    component: Optional[int] = None  # pick one component of a vector payload


class EmbedCheckRequest(BaseModel):
    pairs: list[tuple[int, float]] = Field(
        default_factory=lambda: [(2, 0.3), (2, 0.5), (3, 0.5)]
    )
    grid: GridSpec = Field(default_factory=GridSpec)
    seed: int = 0
    corpus_size: int = 5
    include_field_checks: bool = True


class KernelCheckRequest(BaseModel):
    alphas: list[float] = Field(default_factory=lambda: [0.25, 0.5, 0.75])
    freqs: int = 10
    times: int = 10
    schur_alphas: int = 10
    grid: GridSpec = Field(default_factory=GridSpec)
    seed: int = 0
    corpus_size: int = 10
    quad_nodes: int = 24


class SolverSpec(BaseModel):
    alpha: float = 0.5
    T: float = 0.1
    steps: int = 128
    tolerance: float = 1e-10
    max_iterations: int = 30
    dealias: bool = True
    quad_nodes: int = 32


class NsRunRequest(BaseModel):
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    field_b64: Optional[str] = None  # vector QAFLD1; otherwise generated
    kind: str = "taylor-green"
    seed: int = 0
    kmax: int = 3
    amplitude: float = 1.0
    eps: Optional[float] = None
    return_final_slice: bool = False


class NsSweepRequest(BaseModel):
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    seed: int = 0
    kmax: int = 3
    amplitudes: list[float] = Field(default_factory=lambda: [1e-3, 1e-2, 1e-1])


class ScaleCheckRequest(BaseModel):
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    field_b64: Optional[str] = None
    kind: str = "taylor-green"
    seed: int = 0
    amplitude: float = 1.0
    lam: int = 2
