"""Coercion and validation of the two grid types used everywhere.

A *mask* is a 2D ``uint8`` array of {0, 1}; a *probability map* is a 2D
``float64`` array with values in [0, 1].
"""
import numpy as np

from .errors import InvalidGridError, ShapeMismatchError

PROB_TOL = 1e-9


def as_mask(mask) -> np.ndarray:
    m = np.asarray(mask)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidGridError(f"mask must be a non-empty 2D grid, got shape {m.shape}")
    if m.dtype == bool:
        return m.astype(np.uint8)
    if not np.all((m == 0) | (m == 1)):
        raise InvalidGridError("mask pixels must be exactly 0 or 1")
    return m.astype(np.uint8, copy=False)


def as_probmap(p, tol: float = PROB_TOL) -> np.ndarray:
    """Validate a probability map and return it as float64.

    Values within ``tol`` of [0, 1] are clipped; anything further out is
    rejected.
    """
    a = np.asarray(p, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidGridError(f"probability map must be a non-empty 2D grid, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidGridError("probability map contains non-finite values")
    lo, hi = a.min(), a.max()
    if lo < -tol or hi > 1.0 + tol:
        raise InvalidGridError(f"probability values must lie in [0, 1], got range [{lo}, {hi}]")
    if lo < 0.0 or hi > 1.0:
        a = np.clip(a, 0.0, 1.0)
    return a


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
