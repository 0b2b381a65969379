import numpy as np
from scipy.optimize import linear_sum_assignment


SINGULAR_COND = 1e12


def is_singular(matrix: np.ndarray) -> bool:
    """Numerically singular (or non-finite) square matrix."""
    if not np.all(np.isfinite(matrix)):
        return True
    return bool(np.linalg.cond(matrix) > SINGULAR_COND)


def guarded_inverse(matrix: np.ndarray, ridge: float = 1e-10) -> tuple[np.ndarray, bool]:
    """
    Inverse of a symmetric matrix, falling back to a ridge pseudo-inverse when singular.

    Returns (inverse, used_fallback).
    """
    if not is_singular(matrix):
        return np.linalg.inv(matrix), False
    return np.linalg.pinv(matrix, rcond=ridge, hermitian=True), True


def normalize_rows(matrix: np.ndarray) -> tuple[np.ndarray, int]:
    """
    Divide each row by its sum. Rows summing to zero become the basis vector at their
    largest entry. Returns (normalized, number of such rows).
    """
    sums = matrix.sum(axis=1)
    zero = np.abs(sums) < np.finfo(float).tiny
    out = np.empty_like(matrix, dtype=np.float64)
    out[~zero] = matrix[~zero] / sums[~zero, None]
    if zero.any():
        out[zero] = 0.0
        out[np.flatnonzero(zero), np.argmax(matrix[zero], axis=1)] = 1.0
    return out, int(zero.sum())


def align_columns(estimate: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """
    Column permutation of `estimate` best matching `truth`, by Hungarian matching on
    ℓ1 column distances (equivalently, summed row ℓ1 distances). Returns the permutation.
    """
    k = truth.shape[1]
    cost = np.array([[np.abs(estimate[:, a] - truth[:, b]).sum() for a in range(k)] for b in range(k)])
    _, perm = linear_sum_assignment(cost)
    return perm
