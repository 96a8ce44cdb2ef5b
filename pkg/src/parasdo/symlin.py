"""Symmetric-matrix linear algebra.

Symmetric matrices are plain ``numpy`` arrays; :func:`sym` is the checked
constructor.  Orthonormal bases are ``n x k`` arrays whose columns span a
subspace.  ``svec`` uses the row-major upper triangle with off-diagonal
entries scaled by ``sqrt(2)`` so that ``svec(A) @ svec(B) == <A, B>``.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg

from ._backend import kernels
from .errors import DimensionError, InfeasibleError, PreconditionError

SQRT2 = math.sqrt(2.0)


class EigenPair(NamedTuple):
    """Eigenvalues in non-increasing order and matching orthonormal vectors."""

    values: np.ndarray
    vectors: np.ndarray


def svec_dim(n: int) -> int:
    return n * (n + 1) // 2


def svec_order(N: int) -> int:
    """Inverse of :func:`svec_dim`; raises if ``N`` is not triangular."""
    n = int(round((math.sqrt(8 * N + 1) - 1) / 2))
    if svec_dim(n) != N:
        raise DimensionError(f"length {N} is not a triangular number")
    return n


@lru_cache(maxsize=None)
def _triu(n):
    rows, cols = np.triu_indices(n)
    scale = np.where(rows == cols, 1.0, SQRT2)
    for arr in (rows, cols, scale):
        arr.setflags(write=False)
    return rows, cols, scale


def sym(M, rtol: float = 1e-8) -> np.ndarray:
    """Return ``(M + M^T)/2`` after checking that ``M`` is nearly symmetric."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    asym = np.abs(M - M.T).max(initial=0.0)
    if asym > rtol * max(1.0, np.abs(M).max(initial=0.0)):
        raise PreconditionError(f"matrix is not symmetric (asymmetry {asym:.3e})")
    return 0.5 * (M + M.T)


def svec(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    rows, cols, scale = _triu(M.shape[0])
    return M[rows, cols] * scale


def smat(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError("smat expects a vector")
    n = svec_order(v.shape[0])
    rows, cols, scale = _triu(n)
    M = np.zeros((n, n))
    M[rows, cols] = v / scale
    M[cols, rows] = v / scale
    return M


def eig_sym(M) -> EigenPair:
    """Eigen-decomposition by the Jacobi method, eigenvalues descending.

    Ties keep the order produced by the solver (stable sort).
    """
    M = sym(M)
    w, V = kernels.jacobi_eigh(M)
    order = np.argsort(-w, kind="stable")
    return EigenPair(w[order], V[:, order])


def eigvals_sym(M) -> np.ndarray:
    return eig_sym(M).values


def sym_kron(K1, K2) -> np.ndarray:
    """Symmetric Kronecker product as a matrix acting on ``svec``.

    ``sym_kron(K1, K2) @ svec(H) == svec((K2 H K1^T + K1 H K2^T) / 2)``.
    """
    K1 = np.asarray(K1, dtype=np.float64)
    K2 = np.asarray(K2, dtype=np.float64)
    if K1.ndim != 2 or K1.shape[0] != K1.shape[1] or K1.shape != K2.shape:
        raise DimensionError("sym_kron operands must be square of equal order")
    return kernels.sym_kron(K1, K2)


def projector(B) -> np.ndarray:
    B = np.asarray(B, dtype=np.float64)
    return B @ B.T


def check_orthonormal(B, tol: float = 1e-10) -> np.ndarray:
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2:
        raise DimensionError("a basis must be a two-dimensional array")
    k = B.shape[1]
    err = np.abs(B.T @ B - np.eye(k)).max(initial=0.0)
    if err > tol:
        raise PreconditionError(f"columns are not orthonormal (error {err:.3e})")
    return B


def subspace_distance(B1, B2) -> float:
    """Spectral-norm distance between the orthogonal projectors onto two subspaces.

    The bases must have the same ambient and subspace dimensions.
    """
    B1 = np.asarray(B1, dtype=np.float64)
    B2 = np.asarray(B2, dtype=np.float64)
    if B1.ndim != 2 or B2.ndim != 2 or B1.shape != B2.shape:
        raise DimensionError(
            f"subspaces are not comparable: shapes {B1.shape} and {B2.shape}"
        )
    if B1.shape[1] == 0:
        return 0.0
    D = projector(B1) - projector(B2)
    return float(np.linalg.norm(D, 2))


def complete_basis(B) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``range(B)``."""
    B = check_orthonormal(B)
    n, k = B.shape
    if k == 0:
        return np.eye(n)
    Q, _ = np.linalg.qr(B, mode="complete")
    return Q[:, k:]


def null_space(M, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the numerical null space of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.shape[0] == 0:
        return np.eye(M.shape[1])
    return scipy.linalg.null_space(M, rcond=rtol)


def project_affine(x0, A_eq, b_eq, tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """Euclidean projection of ``x0`` onto ``{x : A_eq x = b_eq}``.

    Redundant rows are removed with a pivoted QR factorization.  Raises
    :class:`InfeasibleError` if the system is inconsistent.

    Returns
    -------
    x : ndarray
        The projection.
    dist : float
        ``||x - x0||``.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A_eq, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b_eq, dtype=np.float64))
    if A.shape[1] != x0.shape[0] or A.shape[0] != b.shape[0]:
        raise DimensionError("affine system does not match the point")
    if A.shape[0] == 0:
        return x0.copy(), 0.0
    Q, R, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    r = int(np.sum(diag > 1e-12 * max(1.0, diag[0] if diag.size else 0.0)))
    keep = piv[:r]
    Qr, Rr = Q[:, :r], R[:r, :r]
    # rows kept: A[keep] = Rr^T Qr^T (up to the column permutation of R)
    resid = A[keep] @ x0 - b[keep]
    w = scipy.linalg.solve_triangular(Rr, resid, trans="T")
    x = x0 - Qr @ w
    scale = max(1.0, np.abs(b).max(initial=0.0), np.abs(A).max(initial=0.0) * np.abs(x).max(initial=0.0))
    err = np.abs(A @ x - b).max(initial=0.0)
    if err > tol * scale * 1e2:
        raise InfeasibleError(f"affine system is inconsistent (residual {err:.3e})")
    return x, float(np.linalg.norm(x - x0))
