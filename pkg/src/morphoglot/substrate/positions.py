from __future__ import annotations

import numpy as np
import torch


def sinusoidal_positions(max_len: int, d_model: int) -> torch.Tensor:
    """Fixed sinusoidal position table of shape (max_len, d_model).

    ``PE[pos, 2i] = sin(pos / 10000^(2i/d_model))`` and
    ``PE[pos, 2i+1] = cos(pos / 10000^(2i/d_model))``; computed in float64
    and returned as float32.
    """
    if d_model % 2 != 0:
        raise ValueError(f"d_model must be even, got {d_model}")
    positions = np.arange(max_len, dtype=np.float64)[:, None]
    exponents = np.arange(0, d_model, 2, dtype=np.float64) / d_model
    angles = positions / np.power(10000.0, exponents)[None, :]
    table = np.zeros((max_len, d_model), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)
    return torch.from_numpy(table.astype(np.float32))
