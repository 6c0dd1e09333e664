"""Binary field snapshots.

Layout (all little-endian):

    magic   4 bytes  b"SNLS"
    version u16      currently 1
    d       u16      grid dimension
    N       u32      points per axis
    L       f64      box length
    payload N^d complex doubles, re/im interleaved, row-major mode order
            (spectral coefficients in fft layout)
"""

from __future__ import annotations

import struct

import numpy as np

from .spectral import SPECTRAL, Field, Grid

MAGIC = b"SNLS"
VERSION = 1
_HEADER = struct.Struct("<4sHHId")


def write_snapshot(path, field: Field) -> None:
    spec = field.to_spectral()
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.dimension, g.points, g.length))
        fh.write(np.ascontiguousarray(spec.data, dtype="<c16").tobytes())


def read_snapshot(path) -> Field:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated snapshot header")
        magic, version, d, n, length = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        grid = Grid(dimension=d, points=n, length=length)
        payload = fh.read()
    expected = grid.mode_count * 16
    if len(payload) != expected:
        raise ValueError(f"{path}: payload size {len(payload)} != {expected}")
    data = np.frombuffer(payload, dtype="<c16").astype(np.complex128).reshape(grid.shape)
    return Field(grid, data, SPECTRAL)
