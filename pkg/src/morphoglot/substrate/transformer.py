"""Pre-norm transformer encoder and causal stack.

Attention masking is additive (-inf before softmax), so masked key columns
contribute exact zeros and outputs at a position are unaffected by content
past it (causal) or at padding (key mask).
"""

from __future__ import annotations

from typing import Optional, Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import TransformerConfig
from .positions import sinusoidal_positions


class MultiHeadSelfAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int, dropout: float):
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.proj = nn.Linear(d_model, d_model)
        self.attn_dropout = nn.Dropout(dropout)
        # set True to capture softmax rows in .last_attention (diagnostics)
        self.record_attention = False
        self.last_attention: Optional[torch.Tensor] = None

    def forward(
        self,
        x: torch.Tensor,
        key_mask: Optional[torch.Tensor] = None,
        causal: bool = False,
    ) -> torch.Tensor:
        batch, length, d_model = x.shape
        q, k, v = self.qkv(x).split(d_model, dim=2)
        shape = (batch, length, self.n_heads, self.d_head)
        q = q.view(shape).transpose(1, 2)
        k = k.view(shape).transpose(1, 2)
        v = v.view(shape).transpose(1, 2)
        if self.record_attention:
            # explicit path exposing the softmax rows
            scores = (q @ k.transpose(-2, -1)) / (self.d_head ** 0.5)
            if causal:
                future = torch.triu(
                    torch.ones(length, length, dtype=torch.bool, device=x.device), diagonal=1
                )
                scores = scores.masked_fill(future, float("-inf"))
            if key_mask is not None:
                scores = scores.masked_fill(~key_mask[:, None, None, :], float("-inf"))
            probs = F.softmax(scores, dim=-1)
            self.last_attention = probs.detach()
            probs = self.attn_dropout(probs)
            out = probs @ v
        else:
            mask = None
            if key_mask is not None:
                mask = key_mask[:, None, None, :]
                if causal:
                    tril = torch.tril(
                        torch.ones(length, length, dtype=torch.bool, device=x.device)
                    )
                    mask = mask & tril[None, None, :, :]
            dropout_p = self.attn_dropout.p if self.training else 0.0
            out = F.scaled_dot_product_attention(
                q, k, v, attn_mask=mask, dropout_p=dropout_p,
                is_causal=causal if mask is None else False,
            )
        out = out.transpose(1, 2).reshape(batch, length, d_model)
        return self.proj(out)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int):
        super().__init__()
        self.up = nn.Linear(d_model, d_ff)
        self.down = nn.Linear(d_ff, d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.down(F.gelu(self.up(x)))


class TransformerBlock(nn.Module):
    """Pre-norm residual block: x + attn(ln(x)), then x + ffn(ln(x))."""

    def __init__(self, d_model: int, n_heads: int, d_ff: int, dropout: float):
        super().__init__()
        self.ln_attn = nn.LayerNorm(d_model)
        self.attn = MultiHeadSelfAttention(d_model, n_heads, dropout)
        self.ln_ffn = nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model, d_ff)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x, key_mask=None, causal=False):
        x = x + self.dropout(self.attn(self.ln_attn(x), key_mask, causal))
        x = x + self.dropout(self.ffn(self.ln_ffn(x)))
        return x


class SequenceEncoder(nn.Module):
    """Token-id sequence to (pooled vector, per-token states).

    Embedding plus fixed sinusoidal positions, ``n_layers`` pre-norm blocks,
    final layer norm, then mean pooling over non-pad positions (or the
    first position under ``pooling='cls'``).
    """

    def __init__(self, config: TransformerConfig):
        super().__init__()
        self.config = config
        self.embedding = nn.Embedding(config.vocab_size, config.d_model)
        self.register_buffer(
            "positions", sinusoidal_positions(config.max_seq_len, config.d_model)
        )
        self.input_dropout = nn.Dropout(config.dropout_rate)
        self.blocks = nn.ModuleList(
            TransformerBlock(config.d_model, config.n_heads, config.d_ff, config.dropout_rate)
            for _ in range(config.n_layers)
        )
        self.ln_final = nn.LayerNorm(config.d_model)

    def forward(
        self, token_ids: torch.Tensor, pad_mask: Optional[torch.Tensor] = None
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if token_ids.dim() != 2:
            raise ValueError("token_ids must be (batch, length)")
        batch, length = token_ids.shape
        if length > self.config.max_seq_len:
            raise ValueError(f"sequence length {length} exceeds max {self.config.max_seq_len}")
        if int(token_ids.max()) >= self.config.vocab_size or int(token_ids.min()) < 0:
            raise ValueError("token id out of range")
        if pad_mask is None:
            pad_mask = torch.ones(batch, length, dtype=torch.bool, device=token_ids.device)
        x = self.embedding(token_ids) + self.positions[:length].to(self.embedding.weight.dtype)
        x = self.input_dropout(x)
        for block in self.blocks:
            x = block(x, key_mask=pad_mask, causal=self.config.causal)
        x = self.ln_final(x)
        if self.config.pooling == "cls":
            pooled = x[:, 0]
        else:
            mask = pad_mask.to(x.dtype)[:, :, None]
            pooled = (x * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        return pooled, x


def encode_sequence(
    model: SequenceEncoder,
    token_ids: Sequence[int] | torch.Tensor,
    pad_mask: Optional[Sequence[bool] | torch.Tensor] = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Single-sequence convenience wrapper around :class:`SequenceEncoder`."""
    ids = torch.as_tensor(token_ids, dtype=torch.long).reshape(1, -1)
    mask = None
    if pad_mask is not None:
        mask = torch.as_tensor(pad_mask, dtype=torch.bool).reshape(1, -1)
    pooled, hidden = model(ids, mask)
    return pooled[0], hidden[0]


class CausalStack(nn.Module):
    """Causal pre-norm blocks over already-embedded inputs.

    Adds sinusoidal positions, so callers feed raw projected vectors.
    """

    def __init__(self, d_model: int, n_blocks: int, n_heads: int, d_ff: int,
                 dropout: float, max_seq_len: int):
        super().__init__()
        self.max_seq_len = max_seq_len
        self.register_buffer("positions", sinusoidal_positions(max_seq_len, d_model))
        self.input_dropout = nn.Dropout(dropout)
        self.blocks = nn.ModuleList(
            TransformerBlock(d_model, n_heads, d_ff, dropout) for _ in range(n_blocks)
        )
        self.ln_final = nn.LayerNorm(d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[1] > self.max_seq_len:
            raise ValueError(f"sequence length {x.shape[1]} exceeds max {self.max_seq_len}")
        x = x + self.positions[: x.shape[1]].to(x.dtype)
        x = self.input_dropout(x)
        for block in self.blocks:
            x = block(x, causal=True)
        return self.ln_final(x)
