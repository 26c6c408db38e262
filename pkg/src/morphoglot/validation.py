"""Input validation helpers shared by the estimator-facing API."""

from __future__ import annotations

import numpy as np

from .igt import Corpus, load_corpus


def check_corpus(value, allow_empty: bool = False) -> Corpus:
    """Coerce a Corpus or a corpus-file path into a validated Corpus."""
    if isinstance(value, (str, bytes)):
        value = load_corpus(value)
    if not isinstance(value, Corpus):
        raise TypeError(f"expected a Corpus or corpus path, got {type(value).__name__}")
    if not allow_empty and len(value) == 0:
        raise ValueError("corpus is empty")
    return value


def check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )


def check_unit_vector(vector: np.ndarray, tolerance: float = 1e-3) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float32).reshape(-1)
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > tolerance:
        raise ValueError(f"expected a unit vector, got norm {norm:.6f}")
    return vector
