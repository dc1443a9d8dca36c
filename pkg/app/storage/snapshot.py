# app/storage/snapshot.py
"""
Field snapshot format.

    offset  size  type        content
    0       8     bytes       magic b"BSQSNAP1"
    8       8     uint64 LE   N (points per axis)
    16      8     float64 LE  L (box side)
    24      8     uint64 LE   count (number of scalar components)
    32      ...   float64 LE  count blocks of N^3 real-space values

Each block is one scalar component sampled on the grid, stored with the x
index varying fastest (block[i + N*j + N*N*k] is the value at index (i, j, k)).
Component order for vectors is x, y, z.
"""
import os
import struct
from typing import Tuple, Union

import numpy as np

from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.utils.errors import PreconditionError

MAGIC = b"BSQSNAP1"
HEADER = struct.Struct("<8sQdQ")

Field = Union[SpectralScalar, SpectralVector]


def write_snapshot(path: str, field: Field) -> str:
    grid = field.grid
    values = field.physical()
    blocks = values[None] if isinstance(field, SpectralScalar) else values
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, grid.n, float(grid.length), blocks.shape[0]))
        for block in blocks:
            # array index (i, j, k) -> x fastest means Fortran order on (i, j, k)
            fh.write(np.asarray(block, dtype="<f8").tobytes(order="F"))
    return path


def read_header(path: str) -> Tuple[int, float, int]:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
    if len(raw) != HEADER.size:
        raise PreconditionError(f"{path}: truncated snapshot header")
    magic, n, length, count = HEADER.unpack(raw)
    if magic != MAGIC:
        raise PreconditionError(f"{path}: bad snapshot magic {magic!r}")
    return int(n), float(length), int(count)


def read_snapshot(path: str, divergence_free: bool = False) -> Field:
    n, length, count = read_header(path)
    grid = Grid(n, length)
    data = np.fromfile(path, dtype="<f8", offset=HEADER.size)
    if data.size != count * n ** 3:
        raise PreconditionError(f"{path}: expected {count * n ** 3} values, found {data.size}")
    # undo the x-fastest layout of each block
    blocks = np.stack([b.reshape((n, n, n), order="F") for b in data.reshape((count, -1))])
    if count == 1:
        return SpectralScalar.from_physical(grid, blocks[0])
    if count == 3:
        return SpectralVector.from_physical(grid, blocks, divergence_free=divergence_free)
    raise PreconditionError(f"{path}: unsupported component count {count}")
