"""Binary field files (format "AHF1").

Layout, all little-endian:
    bytes 0-3   ASCII magic "AHF1"
    u32         n (points per side)
    f64         L (half width)
    u8          kind: 0 scalar, 1 one-form, 2 two-form, 3 complex
    u8          reserved, must be 0
    payload     n*n*components f64, row-major iy*n+ix, one component
                block after the other (a1 block then a2 block, re then im)
"""

from __future__ import annotations

import struct

import numpy as np

from .fields import ComplexField, OneForm, ScalarField, TwoForm, build_grid

MAGIC = b"AHF1"
_HEADER = struct.Struct("<4sIdBB")

KIND_SCALAR = 0
KIND_ONEFORM = 1
KIND_TWOFORM = 2
KIND_COMPLEX = 3

_N_COMPONENTS = {KIND_SCALAR: 1, KIND_ONEFORM: 2, KIND_TWOFORM: 1, KIND_COMPLEX: 2}


class FieldIOError(Exception):
    """Base class for AHF1 read failures."""


class BadMagicError(FieldIOError):
    pass


class TruncatedFieldError(FieldIOError):
    pass


class NonFiniteFieldError(FieldIOError):
    pass


def _components(field) -> tuple[int, list[np.ndarray]]:
    if isinstance(field, ScalarField):
        return KIND_SCALAR, [field.values]
    if isinstance(field, OneForm):
        return KIND_ONEFORM, [field.a1, field.a2]
    if isinstance(field, TwoForm):
        return KIND_TWOFORM, [field.density]
    if isinstance(field, ComplexField):
        return KIND_COMPLEX, [field.re, field.im]
    raise TypeError(f"cannot serialize {type(field).__name__}")


def write_field(field, path) -> None:
    kind, blocks = _components(field)
    grid = field.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, grid.n, grid.half_width, kind, 0))
        for block in blocks:
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def read_field(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TruncatedFieldError(f"{path}: file shorter than header")
    magic, n, half_width, kind, reserved = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    if kind not in _N_COMPONENTS or reserved != 0:
        raise FieldIOError(f"{path}: unknown kind byte {kind} / reserved {reserved}")
    ncomp = _N_COMPONENTS[kind]
    expected = _HEADER.size + 8 * ncomp * n * n
    if len(raw) < expected:
        raise TruncatedFieldError(
            f"{path}: truncated payload ({len(raw)} bytes, expected {expected})"
        )
    payload = np.frombuffer(raw, dtype="<f8", count=ncomp * n * n, offset=_HEADER.size)
    if not np.all(np.isfinite(payload)):
        raise NonFiniteFieldError(f"{path}: payload contains non-finite values")
    grid = build_grid(n, half_width)
    blocks = [payload[i * n * n:(i + 1) * n * n].reshape(n, n).copy() for i in range(ncomp)]
    if kind == KIND_SCALAR:
        return ScalarField(grid, blocks[0])
    if kind == KIND_ONEFORM:
        return OneForm(grid, blocks[0], blocks[1])
    if kind == KIND_TWOFORM:
        return TwoForm(grid, blocks[0])
    return ComplexField(grid, blocks[0], blocks[1])
