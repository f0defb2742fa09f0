"""Input checks shared by the estimator-style classes and the CLI."""
from __future__ import annotations

import math

import numpy as np

from .exceptions import DomainError, InsufficientDataError


def check_positive(value, name: str) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value}")
    return value


def check_log_values(log_values, min_terms: int = 1, allow_zero: bool = False) -> np.ndarray:
    """1-D float array of logs; ``-inf`` allowed only with ``allow_zero``."""
    lv = np.asarray(log_values, dtype=float)
    if lv.ndim != 1:
        raise ValueError(f"expected a 1-D array of logs, got shape {lv.shape}")
    if np.any(np.isnan(lv)) or np.any(lv == np.inf):
        raise ValueError("log values must not be nan or +inf")
    if not allow_zero and np.any(lv == -np.inf):
        raise ValueError("log values must be finite (strictly positive terms)")
    if lv.size < min_terms:
        raise InsufficientDataError(f"need at least {min_terms} terms, got {lv.size}")
    return lv


def check_index_array(X) -> np.ndarray:
    """Index column for the growth regressors: shape (n,) or (n, 1), integers >= 0."""
    p = np.asarray(X, dtype=float)
    if p.ndim == 2 and p.shape[1] == 1:
        p = p[:, 0]
    if p.ndim != 1:
        raise ValueError(f"expected index vector of shape (n,) or (n, 1), got {p.shape}")
    if np.any(p < 0) or np.any(p != np.round(p)):
        raise ValueError("indices must be non-negative integers")
    return p


def check_sequence_list(X) -> list:
    """Accept one sequence or an iterable of them for the classifier API."""
    from .growth import PositiveSequence

    if isinstance(X, PositiveSequence):
        return [X]
    seqs = list(X)
    for s in seqs:
        if not isinstance(s, PositiveSequence):
            raise TypeError(f"expected PositiveSequence, got {type(s).__name__}")
    return seqs
