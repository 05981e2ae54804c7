"""Bit-exact field file format QAFLD1.

Layout (little endian):
    bytes 0-5   magic "QAFLD1"
    u8          n   (spatial dimension)
    u8          m   (component count; 1 = scalar, n = vector)
    u32         N   (samples per axis, power of two)
    f64         L   (period length)
    payload     m * N^n complex values as interleaved f64 (re, im),
                component-major, row-major within a component.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FieldFormatError
from .fields import Grid, ScalarField, VectorField

MAGIC = b"QAFLD1"
_HEADER = struct.Struct("<6sBBId")


def _pack(field) -> bytes:
    if isinstance(field, ScalarField):
        comps = [field]
    elif isinstance(field, VectorField):
        comps = list(field.components)
    else:
        raise TypeError(f"cannot serialize {type(field).__name__}")
    grid = comps[0].grid
    head = _HEADER.pack(MAGIC, grid.n, len(comps), grid.N, grid.L)
    body = bytearray()
    for c in comps:
        inter = np.empty(grid.size * 2, dtype="<f8")
        flat = c.values.ravel()
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        body += inter.tobytes()
    return head + bytes(body)


def dump_bytes(field) -> bytes:
    return _pack(field)


def write(path, field) -> None:
    with open(path, "wb") as fh:
        fh.write(_pack(field))


def load_bytes(data: bytes):
    if len(data) < _HEADER.size:
        raise FieldFormatError("truncated header")
    magic, n, m, N, L = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if N < 8 or (N & (N - 1)) != 0:
        raise FieldFormatError(f"N must be a power of two >= 8, got {N}")
    if n not in (2, 3):
        raise FieldFormatError(f"dimension must be 2 or 3, got {n}")
    if m < 1:
        raise FieldFormatError("component count must be >= 1")
    if not L > 0:
        raise FieldFormatError(f"period length must be positive, got {L}")
    grid = Grid(n=n, N=N, L=L)
    expect = _HEADER.size + m * grid.size * 16
    if len(data) != expect:
        raise FieldFormatError(f"payload size {len(data)} != expected {expect}")
    comps = []
    off = _HEADER.size
    for _ in range(m):
        inter = np.frombuffer(data, dtype="<f8", count=grid.size * 2, offset=off)
        values = (inter[0::2] + 1j * inter[1::2]).reshape(grid.shape)
        comps.append(ScalarField(grid, values))
        off += grid.size * 16
    if m == 1:
        return comps[0]
    if m == n:
        return VectorField(comps)
    return tuple(comps)


def read(path):
    with open(path, "rb") as fh:
        return load_bytes(fh.read())
