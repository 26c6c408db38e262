from __future__ import annotations

import math

import torch


class NonFiniteLossError(RuntimeError):
    """Raised when a step sees a non-finite loss or gradient; parameters are untouched."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class TrainState:
    """One optimization step: backward, global-norm clip, warmup, AdamW update.

    Weight decay is decoupled (AdamW); the learning rate ramps linearly over
    ``warmup_steps`` and stays constant afterwards.  ``step`` returns the
    pre-clip global gradient norm.
    """

    def __init__(
        self,
        module: torch.nn.Module,
        lr: float,
        weight_decay: float = 0.0,
        clip_norm: float = 1.0,
        warmup_steps: int = 0,
    ):
        self.module = module
        self.base_lr = lr
        self.clip_norm = clip_norm
        self.warmup_steps = warmup_steps
        self.step_count = 0
        self.optimizer = torch.optim.AdamW(
            module.parameters(), lr=lr, weight_decay=weight_decay, betas=(0.9, 0.999), eps=1e-8
        )

    def _lr_scale(self) -> float:
        if self.warmup_steps <= 0:
            return 1.0
        return min(1.0, (self.step_count + 1) / self.warmup_steps)

    def global_grad_norm(self) -> float:
        total = 0.0
        for param in self.module.parameters():
            if param.grad is not None:
                total += float(param.grad.detach().norm(2)) ** 2
        return math.sqrt(total)

    def step(self, loss: torch.Tensor) -> float:
        if not torch.isfinite(loss):
            raise NonFiniteLossError(
                "non-finite loss; step aborted", {"loss": float(loss.detach())}
            )
        self.optimizer.zero_grad(set_to_none=True)
        loss.backward()
        grad_norm = torch.nn.utils.clip_grad_norm_(self.module.parameters(), self.clip_norm)
        if not torch.isfinite(grad_norm):
            self.optimizer.zero_grad(set_to_none=True)
            raise NonFiniteLossError(
                "non-finite gradient norm; step aborted", {"grad_norm": float(grad_norm)}
            )
        scale = self._lr_scale()
        for group in self.optimizer.param_groups:
            group["lr"] = self.base_lr * scale
        self.optimizer.step()
        self.step_count += 1
        return float(grad_norm)
