"""Complex dense linear algebra used by the solvers.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
The pseudo-inverse is computed from a complex SVD and also works on stacks
of matrices (``(..., rows, cols)``), which is how the precompute step
inverts every SDMA set of a given size in one call.
"""

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from .exceptions import InvalidInputError

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{what} contains non-finite entries")


def batched_pseudo_inverse(
    a: npt.ArrayLike, rank_tol: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Moore-Penrose pseudo-inverse of a stack of matrices.

    Args:
        a: Array of shape ``(..., rows, cols)``
        rank_tol: Singular values at or below this are treated as zero.
            ``0`` selects ``max(rows, cols) * eps * sigma_max`` per matrix.

    Returns:
        Tuple ``(pinv, rank)`` where ``pinv`` has shape ``(..., cols, rows)``
        and ``rank`` holds the numerical rank of each matrix.

    Raises:
        InvalidInputError: If the input is not finite, has fewer than two
            dimensions, or ``rank_tol`` is negative
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim < 2 or arr.shape[-1] < 1 or arr.shape[-2] < 1:
        raise InvalidInputError(f"expected a (..., rows, cols) array, got {arr.shape}")
    if rank_tol < 0:
        raise InvalidInputError(f"rank_tol must be non-negative, got {rank_tol}")
    _check_finite(arr, "matrix")

    rows, cols = arr.shape[-2:]
    u, s, vh = np.linalg.svd(arr, full_matrices=False)
    if rank_tol > 0:
        tol = np.full(s.shape[:-1] + (1,), rank_tol)
    else:
        sigma_max = s[..., :1]
        tol = max(rows, cols) * np.finfo(np.float64).eps * sigma_max

    keep = s > tol
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    # A+ = V diag(1/s) U^H
    v = np.swapaxes(vh.conj(), -1, -2)
    u_h = np.swapaxes(u.conj(), -1, -2)
    pinv = (v * s_inv[..., np.newaxis, :]) @ u_h
    return pinv, keep.sum(axis=-1)


def pseudo_inverse(a: npt.ArrayLike, rank_tol: float = 0.0) -> ComplexMatrix:
    """Moore-Penrose pseudo-inverse of a single matrix.

    Args:
        a: Matrix of shape ``(rows, cols)``
        rank_tol: Rank cut-off; ``0`` selects the default rule

    Returns:
        Matrix of shape ``(cols, rows)``
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got shape {arr.shape}")
    pinv, _ = batched_pseudo_inverse(arr, rank_tol)
    return pinv


def hermitian_row_stack(rows: Sequence[npt.ArrayLike]) -> ComplexMatrix:
    """Stack channel row vectors into a ``len(rows) x M`` matrix."""
    if len(rows) == 0:
        raise InvalidInputError("cannot stack an empty list of rows")
    vectors = [np.asarray(r, dtype=np.complex128).reshape(-1) for r in rows]
    length = vectors[0].shape[0]
    if length == 0:
        raise InvalidInputError("rows must not be empty")
    for i, v in enumerate(vectors):
        if v.shape[0] != length:
            raise InvalidInputError(
                f"row {i} has length {v.shape[0]}, expected {length}"
            )
    stacked = np.vstack(vectors)
    _check_finite(stacked, "row stack")
    return stacked


def column_norm(a: npt.ArrayLike, j: int) -> float:
    """Euclidean norm of column ``j``."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not 0 <= j < arr.shape[1]:
        raise InvalidInputError(f"column {j} out of range for {arr.shape[1]} columns")
    return float(np.linalg.norm(arr[:, j]))
