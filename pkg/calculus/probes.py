"""
Random probes for linearity and bilinearity of vector-valued actions.
"""
from typing import Callable

import numpy as np


def _scale(*vectors: np.ndarray) -> float:
    return max(1.0, *(float(np.linalg.norm(v)) for v in vectors))


def linearity_defect(fn: Callable[[np.ndarray], np.ndarray], dim: int,
                     rng: np.random.Generator, probes: int = 5) -> float:
    """
    Largest relative failure of ``fn(a p + b q) = a fn(p) + b fn(q)`` over random probes.
    """
    worst = 0.0
    for _ in range(probes):
        p, q = rng.normal(size=dim), rng.normal(size=dim)
        a, b = rng.normal(), rng.normal()
        lhs = np.asarray(fn(a * p + b * q), dtype=float)
        rhs = a * np.asarray(fn(p), dtype=float) + b * np.asarray(fn(q), dtype=float)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / _scale(lhs, rhs))
    return worst


def bilinearity_defect(fn: Callable[[np.ndarray, np.ndarray], np.ndarray], dim: int,
                       rng: np.random.Generator, probes: int = 5) -> float:
    """
    Largest relative failure of linearity of ``fn(u, v)`` in each slot separately.
    """
    worst = 0.0
    for _ in range(probes):
        u, u2, v, v2 = (rng.normal(size=dim) for _ in range(4))
        a, b = rng.normal(), rng.normal()
        left = np.asarray(fn(a * u + b * u2, v), dtype=float)
        left_rhs = a * np.asarray(fn(u, v), dtype=float) + b * np.asarray(fn(u2, v), dtype=float)
        right = np.asarray(fn(u, a * v + b * v2), dtype=float)
        right_rhs = a * np.asarray(fn(u, v), dtype=float) + b * np.asarray(fn(u, v2), dtype=float)
        worst = max(
            worst,
            float(np.linalg.norm(left - left_rhs)) / _scale(left, left_rhs),
            float(np.linalg.norm(right - right_rhs)) / _scale(right, right_rhs),
        )
    return worst


def relative_gap(a, b) -> float:
    """``|a - b|`` relative to ``max(1, |a|, |b|)``; zero-size inputs give 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a - b)) / _scale(a.reshape(-1), b.reshape(-1))
