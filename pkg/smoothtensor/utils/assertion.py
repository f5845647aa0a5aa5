from typing import Sequence

import numpy as np

from smoothtensor.utils.errors import DimensionMismatchError


def check_dimension(n: int):
    if n < 1:
        raise ValueError("dimension must be greater than zero")


def check_order(ell: int, minimum: int = 1):
    if ell < minimum:
        raise ValueError(f"tensor order must be greater than or equal to {minimum}")


def check_probability(alpha: float):
    if not 0 < alpha <= 1:
        raise ValueError("fraction must lie in (0, 1]")


def check_non_negative(value: float, name: str):
    if value < 0:
        raise ValueError(f"{name} must be greater than or equal to zero")


def check_positive(value: float, name: str):
    if value <= 0:
        raise ValueError(f"{name} must be greater than zero")


def check_index(k: int, upper: int, name: str = 'index'):
    if k < 1 or k > upper:
        raise ValueError(f"{name} must lie in [1, {upper}], got {k}")


def check_same(a: int, b: int, what: str):
    if a != b:
        raise DimensionMismatchError(f"{what} mismatch: {a} != {b}")


def check_matrix(m: np.ndarray, name: str = 'matrix'):
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be two-dimensional, got shape {m.shape}")


def check_vectors(vectors: np.ndarray, n: int):
    if vectors.ndim != 2 or vectors.shape[1] != n:
        raise DimensionMismatchError(f"expected vectors of dimension {n}, got shape {vectors.shape}")


def check_symmetric(s: np.ndarray, tol: float):
    check_matrix(s)
    if s.shape[0] != s.shape[1]:
        raise DimensionMismatchError(f"symmetric matrix must be square, got shape {s.shape}")
    scale = max(1.0, float(np.abs(s).max(initial=0.0)))
    if np.abs(s - s.T).max(initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")


def check_ascending(grid: Sequence[float]):
    if len(grid) == 0 or grid[0] <= 0:
        raise ValueError("grid must be non-empty and positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly ascending")
