"""Numerical rank and kernels with a single threshold policy."""

import numpy as np

from prolongkit.constants import INSTABILITY_FACTOR, RANK_TOL


def threshold(singular: np.ndarray, tol: float = RANK_TOL) -> float:
    """Singular values at or below this value count as zero."""
    largest = float(singular.max()) if singular.size else 0.0
    return tol * max(1.0, largest)


def singular_values(matrix: np.ndarray) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(matrix))
    if 0 in matrix.shape:
        return np.zeros(0)
    return np.linalg.svd(matrix, compute_uv=False)


def rank(matrix: np.ndarray, tol: float = RANK_TOL) -> int:
    singular = singular_values(matrix)
    return int(np.sum(singular > threshold(singular, tol)))


def null_space(matrix: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """
    Orthonormal basis of the kernel, as columns.

    A matrix without rows has the whole space as kernel.
    """
    matrix = np.atleast_2d(np.asarray(matrix))
    rows, columns = matrix.shape
    if rows == 0:
        return np.eye(columns, dtype=matrix.dtype)
    _, singular, vh = np.linalg.svd(matrix, full_matrices=True)
    count = int(np.sum(singular > threshold(singular, tol)))
    return vh[count:].conj().T.copy()


def row_space(matrix: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the row space, as rows."""
    matrix = np.atleast_2d(np.asarray(matrix))
    if 0 in matrix.shape:
        return np.zeros((0, matrix.shape[1]))
    _, singular, vh = np.linalg.svd(matrix, full_matrices=False)
    count = int(np.sum(singular > threshold(singular, tol)))
    return vh[:count].copy()


def near_threshold(matrix: np.ndarray, tol: float = RANK_TOL) -> bool:
    """True when a singular value sits within the instability factor of the threshold."""
    singular = singular_values(matrix)
    if singular.size == 0:
        return False
    limit = threshold(singular, tol)
    return bool(
        np.any((singular > limit / INSTABILITY_FACTOR) & (singular < limit * INSTABILITY_FACTOR))
    )
