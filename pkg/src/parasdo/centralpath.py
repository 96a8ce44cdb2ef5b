"""Newton solver for central solutions of the perturbed optimality system.

The system solved is ``F(X, y, S; mu, eps) = 0`` with blocks

    A svec(X) - b
    A^T y + svec(S) - svec(C) - eps svec(Cbar)
    1/2 svec(XS + SX) - mu svec(I)

whose derivative is the block matrix returned by :func:`assemble_jacobian`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from ._backend import kernels
from .errors import DimensionError, NonConvergenceError, PreconditionError, SingularJacobianError
from .model import ParametricInstance, PrimalDualPoint, find_strictly_feasible
from .symlin import eig_sym, smat, svec

MAX_ITER = 50
MAX_HALVINGS = 30
FRACTION_TO_BOUNDARY = 0.9
COND_LIMIT = 1e14
TOL_PATH = 1e-10


def newton_tolerance(n: int, mu: float) -> float:
    return 1e-12 * max(1.0, n * mu)


@dataclass(frozen=True, eq=False)
class CentralSolution:
    point: PrimalDualPoint
    mu: float
    eps: float
    residual: float
    iterations: int = 0

    @property
    def X(self) -> np.ndarray:
        return self.point.X

    @property
    def y(self) -> np.ndarray:
        return self.point.y

    @property
    def S(self) -> np.ndarray:
        return self.point.S


def central_residual(inst: ParametricInstance, eps: float, mu: float, p: PrimalDualPoint) -> np.ndarray:
    """Stacked residual vector ``F`` at ``p``."""
    X, S = p.X, p.S
    if X.shape != (inst.n, inst.n) or p.y.shape != (inst.m,):
        raise DimensionError("point does not match the instance dimensions")
    x, s = svec(X), svec(S)
    XS = X @ S
    comp = 0.5 * (XS + XS.T)
    comp[np.diag_indices_from(comp)] -= mu
    return np.concatenate(
        [
            inst.Amat @ x - inst.b,
            inst.Amat.T @ p.y + s - inst.c - eps * inst.cbar,
            svec(comp),
        ]
    )


def assemble_jacobian(X, S, inst: ParametricInstance) -> np.ndarray:
    """Jacobian ``[[A, 0, 0], [0, A^T, I], [S (x)s I, 0, X (x)s I]]``.

    Columns are ordered ``(svec(dX), dy, svec(dS))``.
    """
    X = np.asarray(X, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if X.shape != (inst.n, inst.n) or S.shape != X.shape:
        raise DimensionError("X and S must be n x n for the instance")
    return kernels.aho_jacobian(inst.Amat, X, S)


def min_singular_value_J(inst: ParametricInstance, p: PrimalDualPoint) -> float:
    J = assemble_jacobian(p.X, p.S, inst)
    return float(np.linalg.svd(J, compute_uv=False)[-1])


def _chol_ok(M) -> bool:
    try:
        np.linalg.cholesky(M)
        return True
    except np.linalg.LinAlgError:
        return False


def _max_step(M, dM) -> float:
    """Largest ``a`` with ``M + a dM`` psd, for ``M`` positive definite."""
    L = np.linalg.cholesky(M)
    Li = scipy.linalg.solve_triangular(L, np.eye(M.shape[0]), lower=True)
    W = Li @ dM @ Li.T
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def newton_solve(
    inst: ParametricInstance,
    eps: float,
    mu: float,
    start: PrimalDualPoint,
    tol: float | None = None,
    max_iter: int = MAX_ITER,
    polish: int = 3,
) -> CentralSolution:
    """Solve ``F(., mu, eps) = 0`` by damped Newton from a strictly feasible start.

    Steps are cut to ``0.9`` of the distance to the boundary of the cone
    and then halved until the residual norm decreases.  Once the residual
    is below ``tol`` up to ``polish`` further steps are taken as long as
    each at least halves it; at tiny ``mu`` the absolute tolerance is
    loose and these steps recover the last digits.

    Raises
    ------
    SingularJacobianError
        The Newton matrix has estimated condition number above 1e14.
    NonConvergenceError
        The iteration cap was hit or the line search stalled.
    """
    if mu <= 0:
        raise PreconditionError("mu must be positive")
    if not (_chol_ok(start.X) and _chol_ok(start.S)):
        raise PreconditionError("start must have X and S positive definite")
    n, m, N = inst.n, inst.m, inst.N
    tol = newton_tolerance(n, mu) if tol is None else tol
    v = start.as_vector()
    X, S = start.X, start.S
    F = central_residual(inst, eps, mu, start)
    r = float(np.linalg.norm(F))
    it = 0
    extra = 0
    while r > tol or extra < polish:
        polishing = r <= tol
        if it >= max_iter:
            if polishing:
                break
            raise NonConvergenceError(
                f"Newton iteration cap reached at mu={mu:.3e}, eps={eps:.6g} (residual {r:.3e})",
                residual=r,
                iterations=it,
            )
        J = kernels.aho_jacobian(inst.Amat, X, S)
        lu, piv, info = lapack.dgetrf(J)
        anorm = np.abs(J).sum(axis=0).max()
        rcond = lapack.dgecon(lu, anorm, norm="1")[0] if info == 0 else 0.0
        if info != 0 or rcond * COND_LIMIT < 1.0:
            if polishing:
                break
            raise SingularJacobianError(
                f"Newton matrix is numerically singular at mu={mu:.3e}, eps={eps:.6g}"
                f" (reciprocal condition {rcond:.3e})",
                residual=r,
                iterations=it,
            )
        d, _ = lapack.dgetrs(lu, piv, -F)
        dX, dS = smat(d[:N]), smat(d[N + m:])
        alpha = min(1.0, FRACTION_TO_BOUNDARY * min(_max_step(X, dX), _max_step(S, dS)))
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            vn = v + alpha * d
            pn = PrimalDualPoint.from_vector(vn, n, m)
            if _chol_ok(pn.X) and _chol_ok(pn.S):
                Fn = central_residual(inst, eps, mu, pn)
                rn = float(np.linalg.norm(Fn))
                # a polishing step must at least halve the residual
                if rn <= (0.5 if polishing else 1.0 - 1e-4 * alpha) * r:
                    accepted = True
                    break
            if polishing:
                break
            alpha *= 0.5
        if not accepted:
            if polishing:
                break
            raise NonConvergenceError(
                f"line search stalled at mu={mu:.3e}, eps={eps:.6g} (residual {r:.3e})",
                residual=r,
                iterations=it,
            )
        it += 1
        if polishing:
            extra += 1
        v, X, S, F, r = vn, pn.X, pn.S, Fn, rn
    point = PrimalDualPoint.from_vector(v, n, m)
    return CentralSolution(point=point, mu=float(mu), eps=float(eps), residual=r, iterations=it)


def geometric_schedule(mu_start: float, rate: float, mu_stop: float) -> list[float]:
    """``mu_start * rate**k`` for ``k = 0, 1, ...`` while the value is ``>= mu_stop``."""
    if not 0.0 < rate < 1.0:
        raise PreconditionError("rate must lie in (0, 1)")
    out = []
    mu = float(mu_start)
    k = 0
    while mu >= mu_stop:
        out.append(mu)
        k += 1
        mu = mu_start * rate**k
    return out


@dataclass
class PathTrace:
    """Central solutions along a schedule plus their eigenvalue tracks.

    ``eig_X[k]`` holds the eigenvalues of ``X`` at node ``k`` in descending
    order and ``eig_S[k]`` the Rayleigh quotients of ``S`` on the
    corresponding eigenvectors.
    """

    solutions: list = field(default_factory=list)
    eig_X: list = field(default_factory=list)
    eig_S: list = field(default_factory=list)

    def append(self, sol: CentralSolution) -> None:
        w, V = eig_sym(sol.X)
        self.solutions.append(sol)
        self.eig_X.append(w)
        self.eig_S.append(np.einsum("ij,ik,kj->j", V, sol.S, V))

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def __getitem__(self, k):
        return self.solutions[k]


def trace_path(
    inst: ParametricInstance,
    eps: float,
    mu_schedule: Sequence[float],
    start: PrimalDualPoint | CentralSolution,
) -> PathTrace:
    """Warm-started Newton solves along a strictly decreasing schedule."""
    mus = list(mu_schedule)
    if any(b >= a for a, b in zip(mus, mus[1:])):
        raise PreconditionError("mu schedule must be strictly decreasing")
    point = start.point if isinstance(start, CentralSolution) else start
    trace = PathTrace()
    for mu in mus:
        try:
            sol = newton_solve(inst, eps, mu, point)
        except NonConvergenceError as exc:
            exc.mu = mu
            exc.point = trace
            raise
        trace.append(sol)
        point = sol.point
    return trace


def _homotopy(inst, eps, sol: CentralSolution, mu_target: float, factor: float = 4.0):
    """Move a central solution to ``mu_target`` in geometric steps."""
    mu = sol.mu
    while not math.isclose(mu, mu_target, rel_tol=1e-15):
        if mu > mu_target:
            mu = max(mu / factor, mu_target)
        else:
            mu = min(mu * factor, mu_target)
        sol = newton_solve(inst, eps, mu, sol.point)
    return sol


def initial_center(inst: ParametricInstance, eps: float, mu: float = 1.0, start=None) -> CentralSolution:
    """Central solution at ``mu``, starting from a strictly feasible point."""
    p = find_strictly_feasible(inst, eps) if start is None else start
    mu0 = float(np.vdot(p.X, p.S)) / inst.n
    last = None
    for scale in (1.0, 10.0, 100.0):
        try:
            sol = newton_solve(inst, eps, mu0 * scale, p)
            return _homotopy(inst, eps, sol, mu)
        except NonConvergenceError as exc:
            last = exc
    raise last


__all__ = [
    "CentralSolution",
    "PathTrace",
    "assemble_jacobian",
    "central_residual",
    "geometric_schedule",
    "initial_center",
    "min_singular_value_J",
    "newton_solve",
    "newton_tolerance",
    "trace_path",
]
