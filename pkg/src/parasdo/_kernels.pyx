# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Jacobi eigensolver, symmetric Kronecker product and
Newton matrix assembly.  ``_kernels_py`` mirrors this API in pure Python."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

BACKEND = "compiled"

cdef double SQRT2 = 1.4142135623730951


def jacobi_eigh(M, double rtol=2.220446049250313e-16, int max_sweeps=60):
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Returns ``(w, V)`` with ``M = V diag(w) V^T``; eigenvalues are unsorted.
    An off-diagonal entry is annihilated unless it is below
    ``rtol * sqrt(|a_pp a_qq|)``, which keeps small eigenvalues of positive
    definite matrices accurate to high relative precision.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(M, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] a = A
    cdef double[:, ::1] v = V
    cdef Py_ssize_t p, q, k
    cdef int sweep, rotated
    cdef double apq, app, aqq, theta, t, c, s, tau, akp, akq, g, h, tiny
    if A.shape[1] != n:
        raise ValueError("matrix must be square")
    tiny = 1e-300
    for sweep in range(max_sweeps):
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                app = a[p, p]
                aqq = a[q, q]
                if fabs(apq) <= tiny or fabs(apq) <= rtol * sqrt(fabs(app * aqq)):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                rotated = 1
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        g = akp - s * (akq + tau * akp)
                        h = akq + s * (akp - tau * akq)
                        a[k, p] = g
                        a[p, k] = g
                        a[k, q] = h
                        a[q, k] = h
                for k in range(n):
                    g = v[k, p]
                    h = v[k, q]
                    v[k, p] = g - s * (h + tau * g)
                    v[k, q] = h + s * (g - tau * h)
        if not rotated:
            break
    return np.diagonal(A).copy(), V


cdef void _skron_fill(const double[:, ::1] K1, const double[:, ::1] K2, double[:, ::1] out,
                      Py_ssize_t r0, Py_ssize_t c0) noexcept nogil:
    cdef Py_ssize_t n = K1.shape[0]
    cdef Py_ssize_t i, j, k, l, p, q
    cdef double tij
    p = 0
    for i in range(n):
        for j in range(i, n):
            q = 0
            for k in range(n):
                for l in range(k, n):
                    if k == l:
                        tij = 0.5 * (K2[i, k] * K1[j, k] + K1[i, k] * K2[j, k])
                    else:
                        tij = 0.5 * (K2[i, k] * K1[j, l] + K2[i, l] * K1[j, k]
                                     + K1[i, k] * K2[j, l] + K1[i, l] * K2[j, k]) / SQRT2
                    if i != j:
                        tij = tij * SQRT2
                    out[r0 + p, c0 + q] = tij
                    q += 1
            p += 1


def sym_kron(K1, K2):
    """Matrix of ``svec(H) -> 1/2 svec(K2 H K1^T + K1 H K2^T)``."""
    cdef const double[:, ::1] a = np.ascontiguousarray(K1, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(K2, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    if a.shape[1] != n or b.shape[0] != n or b.shape[1] != n:
        raise ValueError("operands must be square of equal order")
    cdef Py_ssize_t N = n * (n + 1) // 2
    out = np.empty((N, N), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        _skron_fill(a, b, o, 0, 0)
    return out


def aho_jacobian(Amat, X, S):
    """Assemble ``[[A, 0, 0], [0, A^T, I], [S (x)s I, 0, X (x)s I]]``."""
    cdef const double[:, ::1] A = np.ascontiguousarray(Amat, dtype=np.float64)
    cdef const double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t N = A.shape[1]
    cdef Py_ssize_t n = x.shape[0]
    if N != n * (n + 1) // 2:
        raise ValueError("constraint matrix width does not match svec dimension")
    cdef Py_ssize_t dim = m + 2 * N
    cdef Py_ssize_t i, j
    J = np.zeros((dim, dim), dtype=np.float64)
    cdef double[:, ::1] o = J
    eye = np.eye(n, dtype=np.float64)
    cdef const double[:, ::1] e = eye
    with nogil:
        for i in range(m):
            for j in range(N):
                o[i, j] = A[i, j]
                o[m + j, N + i] = A[i, j]
        for j in range(N):
            o[m + j, N + m + j] = 1.0
        _skron_fill(s, e, o, m + N, 0)
        _skron_fill(x, e, o, m + N, N + m)
    return J
