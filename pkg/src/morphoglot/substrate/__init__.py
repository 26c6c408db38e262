"""Minimal transformer substrate sized for CPU desk-scale training.

All tensors are 32-bit floats (row-major); a 64-bit shadow mode (module
``.double()``) backs the finite-difference gradient checker.  Autograd and
the decoupled-weight-decay adaptive-moment optimizer come from torch; the
gradient oracle in :mod:`.gradcheck` is independent of both.
"""

from .config import TransformerConfig
from .positions import sinusoidal_positions
from .transformer import CausalStack, SequenceEncoder, encode_sequence
from .optim import NonFiniteLossError, TrainState
from .checkpoint import (
    CheckpointFormatError,
    fingerprint,
    load_into_module,
    load_tensors,
    module_tensors,
    save_tensors,
)
from .gradcheck import GradCheckReport, finite_difference_check

__all__ = [
    "TransformerConfig",
    "sinusoidal_positions",
    "SequenceEncoder",
    "CausalStack",
    "encode_sequence",
    "TrainState",
    "NonFiniteLossError",
    "save_tensors",
    "load_tensors",
    "module_tensors",
    "load_into_module",
    "fingerprint",
    "CheckpointFormatError",
    "finite_difference_check",
    "GradCheckReport",
]
