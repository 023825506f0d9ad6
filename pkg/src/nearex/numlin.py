"""Dense complex linear algebra with explicit rank decisions.

Thin wrappers over LAPACK (via numpy/scipy) that make the numerical-rank
tolerance policy of the package explicit in one place.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

DEFAULT_RANK_TOL = 1e-8
_PIVOT_TOL = 1e-14


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a square solve meets a numerically zero pivot."""


def solve_square(A, b):
    """Solve ``A x = b`` for square ``A`` by LU with partial pivoting.

    Raises :class:`SingularMatrixError` when the smallest pivot magnitude is
    below ``1e-14 * ||A||``.
    """
    A = np.ascontiguousarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ValueError("right-hand side length mismatch")
    if A.shape[0] == 0:
        return np.zeros_like(b)
    norm = np.linalg.norm(A)
    try:
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularMatrixError(str(exc)) from exc
    pivots = np.abs(np.diag(lu))
    if norm == 0 or pivots.min() <= _PIVOT_TOL * norm:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below threshold {_PIVOT_TOL * norm:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def singular_values(A):
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(A, check_finite=False)


def numerical_rank(A, tol=DEFAULT_RANK_TOL):
    """Number of singular values above ``tol`` times the largest one."""
    s = singular_values(A)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def null_space(A, tol=DEFAULT_RANK_TOL):
    """Orthonormal basis (columns) of the numerical kernel of ``A``."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.eye(A.shape[1] if A.ndim == 2 else 0, dtype=complex)
    U, s, Vh = scipy.linalg.svd(A, full_matrices=True, check_finite=False)
    rank = 0 if s.size == 0 or s[0] == 0 else int(np.count_nonzero(s > tol * s[0]))
    return Vh[rank:].conj().T


def nullity(A, tol=DEFAULT_RANK_TOL):
    A = np.asarray(A, dtype=complex)
    return A.shape[1] - numerical_rank(A, tol)


def lstsq(A, b):
    """Minimum-norm least-squares solution of ``A x = b``."""
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    x, *_ = scipy.linalg.lstsq(A, b, check_finite=False, lapack_driver="gelsd")
    return x
