"""Finite-difference gradient oracle.

Perturbs every parameter element by ±h and compares central differences
against reverse-mode gradients.  The module under test must be in float64
(``module.double()``) and in eval mode so the loss is a smooth deterministic
function of the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torch


@dataclass
class GradCheckRow:
    name: str
    rel_error: float
    max_abs_diff: float


@dataclass
class GradCheckReport:
    rows: list[GradCheckRow]
    tolerance: float

    @property
    def max_rel_error(self) -> float:
        return max((row.rel_error for row in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def __str__(self) -> str:
        lines = [f"{'parameter':40s} {'rel_error':>12s} {'max_abs_diff':>12s}"]
        for row in self.rows:
            lines.append(f"{row.name:40s} {row.rel_error:12.3e} {row.max_abs_diff:12.3e}")
        lines.append(f"max rel error {self.max_rel_error:.3e} "
                     f"({'PASS' if self.passed else 'FAIL'} at {self.tolerance:g})")
        return "\n".join(lines)


def finite_difference_check(
    module: torch.nn.Module,
    loss_fn: Callable[[], torch.Tensor],
    h: float = 1e-3,
    tolerance: float = 1e-4,
) -> GradCheckReport:
    """Per-parameter relative error between central differences and backprop.

    The relative error of a parameter tensor is
    ``||g_fd - g_bp|| / max(||g_fd||, ||g_bp||, 1e-12)``.
    """
    if module.training:
        raise ValueError("module must be in eval mode for finite differences")
    if next(module.parameters()).dtype != torch.float64:
        raise ValueError("module must be in float64 (shadow mode) for finite differences")

    module.zero_grad(set_to_none=True)
    loss = loss_fn()
    loss.backward()
    analytic = {
        name: (param.grad.detach().clone() if param.grad is not None
               else torch.zeros_like(param))
        for name, param in module.named_parameters()
    }

    rows = []
    with torch.no_grad():
        for name, param in module.named_parameters():
            flat = param.data.view(-1)
            fd = torch.zeros_like(flat)
            for idx in range(flat.numel()):
                original = flat[idx].item()
                flat[idx] = original + h
                loss_plus = loss_fn().item()
                flat[idx] = original - h
                loss_minus = loss_fn().item()
                flat[idx] = original
                fd[idx] = (loss_plus - loss_minus) / (2.0 * h)
            fd = fd.view_as(param)
            g = analytic[name]
            denom = max(float(fd.norm()), float(g.norm()), 1e-12)
            rel = float((fd - g).norm()) / denom
            rows.append(GradCheckRow(name, rel, float((fd - g).abs().max())))
    module.zero_grad(set_to_none=True)
    return GradCheckReport(rows, tolerance)
