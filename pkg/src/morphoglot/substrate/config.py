from __future__ import annotations

from dataclasses import dataclass


@dataclass
class TransformerConfig:
    """Shape of one transformer stack.

    Desk-scale defaults keep CPU training in the minutes range; the
    reference full-size shapes (e.g. 4 blocks at width 512) are plain field
    overrides.
    """

    vocab_size: int
    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 4
    d_ff: int = 512
    max_seq_len: int = 256
    dropout_rate: float = 0.1
    causal: bool = False
    pooling: str = "mean"

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.pooling not in ("mean", "cls"):
            raise ValueError(f"pooling must be 'mean' or 'cls', got {self.pooling!r}")
