"""Binary tensor checkpoints.

Layout (all integers little-endian): magic ``MGLT``, u32 format version,
u32 entry count, then per entry u16 name length + UTF-8 name, u8 rank,
u32 per-dimension extents, u64 byte offset into the data section; the data
section holds raw float32 values in row-major order.  Round trips are
byte-exact.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Union

import numpy as np
import torch

MAGIC = b"MGLT"
VERSION = 1


class CheckpointFormatError(ValueError):
    pass


def save_tensors(named: dict[str, np.ndarray], path=None) -> bytes:
    """Serialize named float32 arrays; write to ``path`` when given."""
    manifest = bytearray()
    data = bytearray()
    for name, array in named.items():
        array = np.ascontiguousarray(array, dtype="<f4")
        encoded = name.encode("utf-8")
        manifest += struct.pack("<H", len(encoded)) + encoded
        manifest += struct.pack("<B", array.ndim)
        manifest += struct.pack(f"<{array.ndim}I", *array.shape)
        manifest += struct.pack("<Q", len(data))
        data += array.tobytes(order="C")
    blob = MAGIC + struct.pack("<II", VERSION, len(named)) + bytes(manifest) + bytes(data)
    if path is not None:
        with open(path, "wb") as handle:
            handle.write(blob)
    return blob


def load_tensors(source: Union[bytes, str]) -> dict[str, np.ndarray]:
    """Inverse of :func:`save_tensors`; accepts a path or raw bytes."""
    if isinstance(source, (str, bytes)) and not isinstance(source, bytes):
        with open(source, "rb") as handle:
            blob = handle.read()
    elif isinstance(source, bytes):
        blob = source
    else:
        with open(source, "rb") as handle:
            blob = handle.read()
    if blob[:4] != MAGIC:
        raise CheckpointFormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}")
    offset = 12
    entries = []
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            name = blob[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", blob, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", blob, offset)
            offset += 4 * ndim
            (data_offset,) = struct.unpack_from("<Q", blob, offset)
            offset += 8
            entries.append((name, shape, data_offset))
    except struct.error as exc:
        raise CheckpointFormatError(f"truncated manifest: {exc}") from exc
    data_start = offset
    out = {}
    for name, shape, data_offset in entries:
        n_values = int(np.prod(shape)) if shape else 1
        start = data_start + data_offset
        end = start + 4 * n_values
        if end > len(blob):
            raise CheckpointFormatError(f"truncated data for tensor {name!r}")
        out[name] = np.frombuffer(blob[start:end], dtype="<f4").reshape(shape).copy()
    return out


def module_tensors(module: torch.nn.Module) -> dict[str, np.ndarray]:
    """Module state as float32 numpy arrays, in state-dict order."""
    return {
        name: tensor.detach().cpu().to(torch.float32).numpy()
        for name, tensor in module.state_dict().items()
    }


def load_into_module(module: torch.nn.Module, tensors: dict[str, np.ndarray]) -> None:
    state = {name: torch.from_numpy(np.ascontiguousarray(array)) for name, array in tensors.items()}
    module.load_state_dict(state)


def fingerprint(blob: bytes) -> bytes:
    """32-byte digest binding artifacts to the exact parameter bytes."""
    return hashlib.sha256(blob).digest()
