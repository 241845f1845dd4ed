"""Minimal self-describing binary tensor files.

Layout::

    b"HNT1"                       magic
    uint64 M, N, S                little-endian
    M*N*S float64                 little-endian, first index fastest
                                  (k outermost, i innermost)
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import TensorFormatError

MAGIC = b"HNT1"
_HEADER = struct.Struct("<4sQQQ")
_MAX_ELEMENTS = 1 << 40


def encode(t) -> bytes:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"only 3-order tensors can be saved, got shape {t.shape}")
    header = _HEADER.pack(MAGIC, *t.shape)
    return header + t.ravel(order="F").astype("<f8").tobytes()


def decode(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise TensorFormatError(f"file too short for header ({len(buf)} bytes)")
    magic, m, n, s = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}")
    if min(m, n, s) < 1:
        raise TensorFormatError(f"invalid dims ({m}, {n}, {s})")
    count = m * n * s
    if count > _MAX_ELEMENTS:
        raise TensorFormatError(f"dims ({m}, {n}, {s}) overflow the element limit")
    payload = len(buf) - _HEADER.size
    if payload == 0:
        raise TensorFormatError("header present but payload missing")
    if payload != 8 * count:
        raise TensorFormatError(f"payload has {payload} bytes, expected {8 * count}")
    data = np.frombuffer(buf, dtype="<f8", count=count, offset=_HEADER.size)
    return data.astype(np.float64).reshape((m, n, s), order="F")


def save(t, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode(t))


def load(path) -> np.ndarray:
    with open(os.fspath(path), "rb") as fh:
        return decode(fh.read())
