"""Pure-Python versions of the kernels in ``_kernels.pyx``.

Same functions, same semantics; used when the compiled module is missing
or when ``PARASDO_PURE=1`` is set.
"""
import math
from functools import lru_cache

import numpy as np

BACKEND = "python"

_SQRT2 = math.sqrt(2.0)


def jacobi_eigh(M, rtol=2.220446049250313e-16, max_sweeps=60):
    """Cyclic Jacobi eigensolver; returns unsorted ``(w, V)``."""
    a = np.array(M, dtype=np.float64, copy=True)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("matrix must be square")
    v = np.eye(n)
    tiny = 1e-300
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                app = a[p, p]
                aqq = a[q, q]
                if abs(apq) <= tiny or abs(apq) <= rtol * math.sqrt(abs(app * aqq)):
                    a[p, q] = a[q, p] = 0.0
                    continue
                rotated = True
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                mask = np.ones(n, dtype=bool)
                mask[[p, q]] = False
                akp = a[mask, p].copy()
                akq = a[mask, q].copy()
                g = akp - s * (akq + tau * akp)
                h = akq + s * (akp - tau * akq)
                a[mask, p] = g
                a[p, mask] = g
                a[mask, q] = h
                a[q, mask] = h
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp - s * (vq + tau * vp)
                v[:, q] = vq + s * (vp - tau * vq)
        if not rotated:
            break
    return np.diagonal(a).copy(), v


@lru_cache(maxsize=None)
def _svec_from_vec(n):
    # U with svec(H) = U vec(H) for symmetric H, split evenly over (i,j),(j,i)
    N = n * (n + 1) // 2
    U = np.zeros((N, n * n))
    p = 0
    for i in range(n):
        for j in range(i, n):
            if i == j:
                U[p, i * n + i] = 1.0
            else:
                U[p, i * n + j] = 1.0 / _SQRT2
                U[p, j * n + i] = 1.0 / _SQRT2
            p += 1
    U.setflags(write=False)
    return U


def sym_kron(K1, K2):
    """Matrix of ``svec(H) -> 1/2 svec(K2 H K1^T + K1 H K2^T)``."""
    K1 = np.asarray(K1, dtype=np.float64)
    K2 = np.asarray(K2, dtype=np.float64)
    n = K1.shape[0]
    if K1.shape != (n, n) or K2.shape != (n, n):
        raise ValueError("operands must be square of equal order")
    U = _svec_from_vec(n)
    return 0.5 * U @ (np.kron(K1, K2) + np.kron(K2, K1)) @ U.T


def aho_jacobian(Amat, X, S):
    """Assemble ``[[A, 0, 0], [0, A^T, I], [S (x)s I, 0, X (x)s I]]``."""
    Amat = np.asarray(Amat, dtype=np.float64)
    m, N = Amat.shape
    n = X.shape[0]
    if N != n * (n + 1) // 2:
        raise ValueError("constraint matrix width does not match svec dimension")
    eye = np.eye(n)
    J = np.zeros((m + 2 * N, m + 2 * N))
    J[:m, :N] = Amat
    J[m:m + N, N:N + m] = Amat.T
    J[m:m + N, N + m:] = np.eye(N)
    J[m + N:, :N] = sym_kron(S, eye)
    J[m + N:, N + m:] = sym_kron(X, eye)
    return J
