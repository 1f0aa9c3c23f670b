"""Versioned binary checkpoint for network parameters.

Layout: 8-byte magic, u32 version, u32 array count, then per array a
length-prefixed utf-8 name, u8 ndim, u32 dims; after the header all array
payloads as little-endian float64 in header order. Load rejects wrong
magic, unknown versions, truncation, and trailing bytes, and round-trips
bit-exactly.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .network import NetworkParams

MAGIC = b"NAVARENA"
VERSION = 1


def default_policy_path() -> Path:
    """Packaged desk-scale policy (see assets/desk_policy.json for provenance)."""
    return Path(__file__).resolve().parent / "assets" / "desk_policy.npz"


def save_params(params: NetworkParams, path) -> None:
    arrays = params.arrays()
    parts = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for name, arr in arrays:
        nb = name.encode("utf-8")
        parts.append(struct.pack("<H", len(nb)))
        parts.append(nb)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
    for _, arr in arrays:
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_params(path) -> NetworkParams:
    data = Path(path).read_bytes()
    off = 0

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(data):
            raise ValueError(f"checkpoint truncated at byte {off} (+{n})")
        chunk = data[off:off + n]
        off += n
        return chunk

    if take(len(MAGIC)) != MAGIC:
        raise ValueError("not a parameter checkpoint (bad magic)")
    version, count = struct.unpack("<II", take(8))
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    headers = []
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
        headers.append((name, shape))
    arrays = {}
    for name, shape in headers:
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(take(8 * n), dtype="<f8").reshape(shape)
        arrays[name] = arr.astype(np.float64)
    if off != len(data):
        raise ValueError(f"{len(data) - off} trailing bytes after payload")
    try:
        return NetworkParams(**arrays)
    except TypeError as e:
        raise ValueError(f"checkpoint arrays do not form a network: {e}") from e
