"""Problem data for the objective-perturbed primal-dual pair.

For a parameter ``eps`` the primal problem is

    min <C + eps*Cbar, X>  s.t.  <A_i, X> = b_i (i = 1..m),  X psd

and the dual is

    max b^T y  s.t.  sum_i y_i A_i + S = C + eps*Cbar,  S psd.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DimensionError, InfeasibleError, ValidationError
from .symlin import null_space, smat, svec, svec_dim, sym

TAU_INT = 1e-6


@dataclass(frozen=True, eq=False)
class ParametricInstance:
    """Data ``(A, b, C, Cbar)`` of the parametric problem.

    Matrices are symmetrized on construction.  ``A`` is stored as an
    ``(m, n, n)`` array.
    """

    A: np.ndarray
    b: np.ndarray
    C: np.ndarray
    Cbar: np.ndarray
    name: str = ""

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        if A.ndim == 2 and A.shape[0] == 0:
            A = A.reshape(0, 0, 0)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise DimensionError(f"A must be a stack of square matrices, got shape {A.shape}")
        C = sym(self.C)
        n = C.shape[0]
        if n < 1:
            raise DimensionError("matrix order must be at least 1")
        if A.shape[0] and A.shape[1] != n:
            raise DimensionError(f"constraint matrices have order {A.shape[1]}, C has order {n}")
        Cbar = sym(self.Cbar)
        if Cbar.shape != C.shape:
            raise DimensionError("C and Cbar must have the same order")
        b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise DimensionError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
        A = np.stack([sym(Ai) for Ai in A]) if A.shape[0] else np.zeros((0, n, n))
        for arr in (A, b, C, Cbar):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Cbar", Cbar)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        """Dimension of the svec space."""
        return svec_dim(self.n)

    @cached_property
    def Amat(self) -> np.ndarray:
        """The ``m x n(n+1)/2`` matrix with rows ``svec(A_i)``."""
        M = np.array([svec(Ai) for Ai in self.A]).reshape(self.m, self.N)
        M.setflags(write=False)
        return M

    @cached_property
    def c(self) -> np.ndarray:
        return svec(self.C)

    @cached_property
    def cbar(self) -> np.ndarray:
        return svec(self.Cbar)

    def objective(self, eps: float) -> np.ndarray:
        return self.C + eps * self.Cbar

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "C": self.C.tolist(),
            "Cbar": self.Cbar.tolist(),
        }


@dataclass(frozen=True, eq=False)
class PrimalDualPoint:
    X: np.ndarray
    y: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        X = sym(self.X)
        S = sym(self.S)
        if X.shape != S.shape:
            raise DimensionError("X and S must have the same order")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64).reshape(-1))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([svec(self.X), self.y, svec(self.S)])

    @classmethod
    def from_vector(cls, v, n: int, m: int) -> "PrimalDualPoint":
        N = svec_dim(n)
        return cls(smat(v[:N]), v[N:N + m], smat(v[N + m:]))


@dataclass(frozen=True)
class ResidualReport:
    primal_res: float
    dual_res: float
    gap: float
    min_eig_X: float
    min_eig_S: float


@dataclass
class ValidationReport:
    n: int
    m: int
    rank: int
    assumption1: bool
    norms: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.assumption1


def _numerical_rank(M, rtol=1e-10):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rtol * max(M.shape) * s[0])) if s[0] > 0 else 0


def validate_instance(inst: ParametricInstance, raise_on_failure: bool = False) -> ValidationReport:
    """Check linear independence of the constraint matrices."""
    rank = _numerical_rank(inst.Amat)
    report = ValidationReport(
        n=inst.n,
        m=inst.m,
        rank=rank,
        assumption1=rank == inst.m,
        norms={
            "A": float(np.linalg.norm(inst.Amat)),
            "b": float(np.linalg.norm(inst.b)),
            "C": float(np.linalg.norm(inst.C)),
            "Cbar": float(np.linalg.norm(inst.Cbar)),
        },
    )
    if not report.assumption1:
        report.messages.append(
            f"constraint matrices are linearly dependent: rank {rank} < m = {inst.m}"
        )
        if raise_on_failure:
            raise ValidationError(report.messages[-1], check="assumption1")
    return report


def residuals(inst: ParametricInstance, eps: float, p: PrimalDualPoint) -> ResidualReport:
    x, s = svec(p.X), svec(p.S)
    if x.shape[0] != inst.N or p.y.shape[0] != inst.m:
        raise DimensionError("point does not match the instance dimensions")
    rp = inst.Amat @ x - inst.b
    rd = inst.Amat.T @ p.y + s - inst.c - eps * inst.cbar
    return ResidualReport(
        primal_res=float(np.linalg.norm(rp)),
        dual_res=float(np.linalg.norm(rd)),
        gap=float(x @ s),
        min_eig_X=float(np.linalg.eigvalsh(p.X)[0]),
        min_eig_S=float(np.linalg.eigvalsh(p.S)[0]),
    )


def _max_min_eig(M0, Ms, goal=1.0, rho=1e-4, max_iter=200):
    """Approximately maximize ``t`` subject to ``M0 + sum z_j Ms[j] - t I`` psd.

    Damped Newton on ``-t + rho/2 |z|^2 - kappa log det(M(z) - t I)`` for a
    decreasing ``kappa``; the quadratic term keeps the problem bounded when
    the feasible cone contains a ray.  Stops early once ``t >= goal``.
    """
    n = M0.shape[0]
    k = len(Ms)
    Ms = np.asarray(Ms).reshape(k, n, n)
    I = np.eye(n)

    def mat(z):
        return M0 + np.tensordot(z, Ms, axes=1) if k else M0.copy()

    z = np.zeros(k)
    t = float(np.linalg.eigvalsh(M0)[0]) - 1.0
    if t + 1.0 >= goal:
        return z, t + 1.0
    for kappa in (1.0, 1e-1, 1e-2, 1e-3, 1e-4):
        for _ in range(max_iter):
            W = np.linalg.inv(mat(z) - t * I)
            WM = np.einsum("ij,kjl->kil", W, Ms)
            g = np.empty(k + 1)
            g[:k] = rho * z - kappa * np.einsum("kii->k", WM)
            g[k] = -1.0 + kappa * np.trace(W)
            H = np.empty((k + 1, k + 1))
            H[:k, :k] = rho * np.eye(k) + kappa * np.einsum("aij,bji->ab", WM, WM)
            WW = W @ W
            H[:k, k] = H[k, :k] = -kappa * np.einsum("ij,kji->k", WW, Ms)
            H[k, k] = kappa * np.trace(WW)
            d = -np.linalg.solve(H, g)
            dec = float(-g @ d)
            step = 1.0
            f0 = _phase1_obj(mat, z, t, kappa, rho, I)
            while step > 1e-12:
                zn, tn = z + step * d[:k], t + step * d[k]
                fn = _phase1_obj(mat, zn, tn, kappa, rho, I)
                if np.isfinite(fn) and fn <= f0 - 0.25 * step * dec:
                    break
                step *= 0.5
            else:
                break
            z, t = zn, tn
            lam_min = float(np.linalg.eigvalsh(mat(z))[0])
            if lam_min >= goal:
                return z, lam_min
            if dec < 1e-12:
                break
    return z, float(np.linalg.eigvalsh(mat(z))[0])


def _phase1_obj(mat, z, t, kappa, rho, I):
    try:
        L = np.linalg.cholesky(mat(z) - t * I)
    except np.linalg.LinAlgError:
        return np.inf
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return -t + 0.5 * rho * float(z @ z) - kappa * logdet


def find_strictly_feasible(
    inst: ParametricInstance, eps: float, tau: float = TAU_INT
) -> PrimalDualPoint:
    """Find ``(X, y, S)`` with ``X, S`` positive definite and zero residuals.

    The primal side maximizes the smallest eigenvalue over the affine
    solution set of the equality constraints.  The dual side uses a shift
    ``y = -M w`` when the identity lies in the span of the ``A_i`` and the
    same smallest-eigenvalue problem otherwise.

    Raises
    ------
    InfeasibleError
        If no point with both smallest eigenvalues ``>= tau`` was found.
        This is a failed probe, not a proof of infeasibility.
    """
    n, m = inst.n, inst.m
    Amat = inst.Amat
    # primal: X = X0 + sum z_j N_j
    x0, *_ = np.linalg.lstsq(Amat, inst.b, rcond=None) if m else (np.zeros(inst.N),)
    if m and np.linalg.norm(Amat @ x0 - inst.b) > 1e-9 * max(1.0, np.linalg.norm(inst.b)):
        raise InfeasibleError("equality constraints are inconsistent", side="primal")
    Z = null_space(Amat) if m else np.eye(inst.N)
    X0 = smat(x0)
    Xz, tX = _max_min_eig(X0, [smat(v) for v in Z.T])
    X = X0 + (np.tensordot(Xz, np.array([smat(v) for v in Z.T]), axes=1) if Z.shape[1] else 0)
    if tX < tau:
        raise InfeasibleError(
            f"primal interior probe failed (best smallest eigenvalue {tX:.3e})", side="primal"
        )

    Ceps = inst.objective(eps)
    y = None
    if m:
        w, *_ = np.linalg.lstsq(Amat.T, svec(np.eye(n)), rcond=None)
        if np.linalg.norm(Amat.T @ w - svec(np.eye(n))) <= 1e-10 * np.sqrt(n):
            shift = max(0.0, -float(np.linalg.eigvalsh(Ceps)[0])) + 1.0
            y = -shift * w
    if y is None:
        Ms = [-Ai for Ai in inst.A]
        y, tS = _max_min_eig(Ceps, Ms) if m else (np.zeros(0), float(np.linalg.eigvalsh(Ceps)[0]))
        y = np.asarray(y)
    S = Ceps - np.tensordot(y, inst.A, axes=1) if m else Ceps.copy()
    S = 0.5 * (S + S.T)
    X = 0.5 * (X + X.T)
    tS = float(np.linalg.eigvalsh(S)[0])
    if tS < tau:
        raise InfeasibleError(
            f"dual interior probe failed (best smallest eigenvalue {tS:.3e})", side="dual"
        )
    return PrimalDualPoint(X, y, S)


def _matrix(value, n, name):
    try:
        M = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError(f"field '{name}' is not a rectangular numeric array", check="parse") from None
    if M.shape != (n, n):
        raise ValidationError(f"field '{name}' must be a {n}x{n} matrix, got shape {M.shape}", check="parse")
    return M


def instance_from_dict(data: dict, name: str = "") -> ParametricInstance:
    """Build an instance from the JSON object layout used by the CLI."""
    try:
        n = int(data["n"])
        m = int(data["m"])
        A = data["A"]
        b = data["b"]
        C, Cbar = data["C"], data["Cbar"]
    except KeyError as exc:
        raise ValidationError(f"missing field {exc}", check="parse") from None
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad field type: {exc}", check="parse") from None
    if len(A) != m:
        raise ValidationError(f"field 'A' has {len(A)} matrices, expected m = {m}", check="parse")
    if len(b) != m:
        raise ValidationError(f"field 'b' has length {len(b)}, expected m = {m}", check="parse")
    try:
        mats = [_matrix(Ai, n, f"A[{i}]") for i, Ai in enumerate(A)]
        Cm, Cb = _matrix(C, n, "C"), _matrix(Cbar, n, "Cbar")
        return ParametricInstance(
            np.array(mats).reshape(m, n, n), np.asarray(b, dtype=float), Cm, Cb, name=name
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc), check="parse") from None


def load_instance(path) -> ParametricInstance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", check="io") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", check="parse"
        ) from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object", check="parse")
    return instance_from_dict(data, name=path.stem)


def save_instance(inst: ParametricInstance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict(), indent=1) + "\n")


__all__ = [
    "ParametricInstance",
    "PrimalDualPoint",
    "ResidualReport",
    "ValidationReport",
    "find_strictly_feasible",
    "instance_from_dict",
    "load_instance",
    "residuals",
    "save_instance",
    "validate_instance",
]
