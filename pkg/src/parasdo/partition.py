"""Approximating the optimal partition ``(B, T, N)`` from central solutions.

On the central path ``X`` and ``S`` commute, so one eigenbasis splits
both.  Directions where ``X`` stays bounded away from zero approximate
``B``, directions where ``S`` does approximate ``N``, and directions where
both vanish approximate ``T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .centralpath import (
    CentralSolution,
    PathTrace,
    assemble_jacobian,
    central_residual,
    geometric_schedule,
    initial_center,
    newton_solve,
)
from .errors import (
    FaceInfeasibleError,
    IdentificationError,
    NonConvergenceError,
    PreconditionError,
)
from .model import ParametricInstance, PrimalDualPoint, _max_min_eig
from .symlin import eig_sym, null_space, project_affine, smat, svec, svec_dim, sym_kron

DEFAULT_RATE = 0.9
DEFAULT_CUTOFF = 1e-5
MU_FLOOR = 1e-16
FACE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PartitionApprox:
    """Orthonormal blocks approximating ``(B, T, N)`` at one central solution.

    ``eig_X`` and ``eig_S`` list the eigenvalues of ``X`` and ``S`` on the
    columns of ``[Q_B | Q_T | Q_N]``; ``bands`` records, per block, the
    range of ``X`` eigenvalues (for B and T) or ``S`` eigenvalues (for N).
    """

    Q_B: np.ndarray
    Q_T: np.ndarray
    Q_N: np.ndarray
    eig_X: np.ndarray
    eig_S: np.ndarray
    bands: dict
    mu: float
    eps: float

    @property
    def n_B(self) -> int:
        return self.Q_B.shape[1]

    @property
    def n_T(self) -> int:
        return self.Q_T.shape[1]

    @property
    def n_N(self) -> int:
        return self.Q_N.shape[1]

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.n_B, self.n_T, self.n_N)

    @property
    def Q(self) -> np.ndarray:
        return np.hstack([self.Q_B, self.Q_T, self.Q_N])

    @property
    def Q_TN(self) -> np.ndarray:
        return np.hstack([self.Q_T, self.Q_N])

    @property
    def Q_BT(self) -> np.ndarray:
        return np.hstack([self.Q_B, self.Q_T])


@dataclass(frozen=True)
class PartitionConstants:
    """Constants entering the band-separation threshold ``mu_tilde``.

    ``gamma=None`` selects ``min(1, 2**(1-n))``.  ``provenance`` maps each
    constant to ``"supplied"`` or ``"estimated"``.
    """

    sigma: float
    c: float = 1.0
    gamma: float | None = None
    mu_hat: float = math.inf
    mu_tilde: float | None = None
    provenance: dict = field(default_factory=dict)

    def gamma_for(self, n: int) -> float:
        return min(1.0, 2.0 ** (1 - n)) if self.gamma is None else self.gamma


def compute_mu_tilde(consts: PartitionConstants, n: int) -> PartitionConstants:
    """Fill ``mu_tilde = min{(1/n)(sigma/(c n^1.5))^(1/gamma), sigma^2/n^2, mu_hat}``."""
    sigma, c = consts.sigma, consts.c
    gamma = consts.gamma_for(n)
    if not sigma > 0 or not c > 0:
        raise PreconditionError("sigma and c must be positive")
    if not 0 < gamma <= 1:
        raise PreconditionError("gamma must lie in (0, 1]")
    if math.isinf(sigma):
        first = second = math.inf
    else:
        first = (sigma / (c * n**1.5)) ** (1.0 / gamma) / n
        second = sigma**2 / n**2
    mu_tilde = min(first, second, consts.mu_hat)
    return replace(consts, gamma=gamma, mu_tilde=mu_tilde)


def _diag_in_basis(S, V, tol=1e-8):
    D = V.T @ S @ V
    off = D - np.diag(np.diag(D))
    if np.abs(off).max(initial=0.0) > tol * max(1.0, np.abs(D).max(initial=0.0)):
        raise PreconditionError(
            "S is not diagonal in the eigenbasis of X; the point is not on the central path"
        )
    return np.diag(D).copy()


def _eigenframe(sol: CentralSolution):
    """Common eigenbasis of ``X`` and ``S`` with the matching eigenvalues.

    Directions where ``X`` is small are poorly resolved by the eigenvectors
    of ``X``, so on that subspace the basis is re-diagonalized against
    ``S``.  Since ``XS = mu I`` on the path, the reordered ``X`` values are
    paired with the ``S`` values in reverse order.
    """
    w, V = eig_sym(sol.X)
    s = np.einsum("ij,ik,kj->j", V, sol.S, V)
    small = np.flatnonzero(w < s)
    if small.size > 1:
        Vs = V[:, small]
        ws, R = eig_sym(Vs.T @ sol.S @ Vs)
        V = V.copy()
        V[:, small] = Vs @ R[:, ::-1]
        w = w.copy()
        w[small] = np.sort(w[small])[::-1]
    return w, V, _diag_in_basis(sol.S, V)


def _assemble(sol, w, V, s, labels) -> PartitionApprox:
    labels = np.asarray(labels)
    iB = np.flatnonzero(labels == "B")
    iT = np.flatnonzero(labels == "T")
    iN = np.flatnonzero(labels == "N")
    iB = iB[np.argsort(-w[iB], kind="stable")]
    iT = iT[np.argsort(-w[iT], kind="stable")]
    iN = iN[np.argsort(-s[iN], kind="stable")]
    rest_X = np.concatenate([w[iT], w[iN]])
    rest_S = np.concatenate([s[iB], s[iT]])
    if iB.size and rest_X.size and w[iB].min() <= rest_X.max():
        raise PreconditionError("B band of X overlaps the remaining eigenvalues")
    if iN.size and rest_S.size and s[iN].min() <= rest_S.max():
        raise PreconditionError("N band of S overlaps the remaining eigenvalues")

    def band(vals):
        return (float(vals.min()), float(vals.max())) if vals.size else None

    order = np.concatenate([iB, iT, iN]).astype(int)
    return PartitionApprox(
        Q_B=V[:, iB],
        Q_T=V[:, iT],
        Q_N=V[:, iN],
        eig_X=w[order],
        eig_S=s[order],
        bands={"B": band(w[iB]), "T": band(w[iT]), "N": band(s[iN])},
        mu=sol.mu,
        eps=sol.eps,
    )


def classify_eigen(sol: CentralSolution, consts: PartitionConstants) -> PartitionApprox:
    """Split a central solution using the theoretical eigenvalue bands.

    ``X`` eigenvalues ``>= sigma/n`` go to B, ``S`` eigenvalues ``>= sigma/n``
    go to N, and directions with both eigenvalues inside
    ``[mu / (c sqrt(n) (n mu)^gamma), c sqrt(n) (n mu)^gamma]`` go to T.
    """
    n = sol.X.shape[0]
    if consts.mu_tilde is None:
        consts = compute_mu_tilde(consts, n)
    mu = sol.mu
    if mu >= consts.mu_tilde:
        raise PreconditionError(
            f"mu = {mu:.3e} is not below the separation threshold {consts.mu_tilde:.3e}"
        )
    gamma = consts.gamma_for(n)
    hi_T = consts.c * math.sqrt(n) * (n * mu) ** gamma
    lo_T = mu / hi_T
    cut = consts.sigma / n
    w, V, s = _eigenframe(sol)
    labels = []
    for lx, ls in zip(w, s):
        isB, isN = lx >= cut, ls >= cut
        isT = lo_T <= lx <= hi_T and lo_T <= ls <= hi_T
        if isB + isN + isT != 1:
            raise PreconditionError(
                f"mu not small enough: eigenvalue pair ({lx:.3e}, {ls:.3e}) fits no single band"
            )
        labels.append("B" if isB else "N" if isN else "T")
    return _assemble(sol, w, V, s, labels)


def cutoff_labels(eig_X, eig_S, cutoff: float = DEFAULT_CUTOFF) -> list[str]:
    """Label eigen-directions by the vanishing/persisting rule.

    ``"U"`` marks a direction where both eigenvalues are still above the
    cutoff.
    """
    out = []
    for lx, ls in zip(eig_X, eig_S):
        px, ps = lx >= cutoff, ls >= cutoff
        out.append("U" if px and ps else "B" if px else "N" if ps else "T")
    return out


def classify_cutoff(sol: CentralSolution, cutoff: float = DEFAULT_CUTOFF) -> PartitionApprox:
    w, V, s = _eigenframe(sol)
    labels = cutoff_labels(w, s, cutoff)
    if "U" in labels:
        raise PreconditionError("some directions are not yet separated at this mu")
    return _assemble(sol, w, V, s, labels)


def trend_labels(eig_now, eig_before, mu_now: float, mu_before: float) -> list[str]:
    """Label directions by how fast the ``X`` eigenvalues decay with ``mu``.

    The log-log slope is near 0 on B, 1/2 on T and 1 on N.
    """
    rho = math.log(mu_now / mu_before)
    out = []
    for a, b in zip(eig_now, eig_before):
        if a <= 0 or b <= 0:
            out.append("N")
            continue
        slope = math.log(a / b) / rho
        out.append("B" if slope < 0.25 else "N" if slope > 0.75 else "T")
    return out


def estimate_sigma(
    inst: ParametricInstance,
    eps: float,
    reference: CentralSolution,
    partition: PartitionApprox | None = None,
    cutoff: float = DEFAULT_CUTOFF,
) -> float:
    """Smallest eigenvalue of the compressed persisting blocks.

    ``min(lambda_min(Q_B^T X Q_B), lambda_min(Q_N^T S Q_N))``; an empty
    block contributes ``inf``.  Exact in the limit when the optimal sets
    are singletons.
    """
    part = classify_cutoff(reference, cutoff) if partition is None else partition
    if part.n_B == 0 and part.n_N == 0:
        raise PreconditionError("internal inconsistency: both B and N are empty")
    sB = np.linalg.eigvalsh(part.Q_B.T @ reference.X @ part.Q_B)[0] if part.n_B else math.inf
    sN = np.linalg.eigvalsh(part.Q_N.T @ reference.S @ part.Q_N)[0] if part.n_N else math.inf
    return float(min(sB, sN))


@dataclass(frozen=True)
class MuHatEstimate:
    mu_hat: float
    theta1: float
    theta2: float
    empirical: bool = True


def mu_hat_from_distances(n, mus, dist_P, dist_D) -> MuHatEstimate:
    mus = np.asarray(mus, dtype=float)
    t1 = float(np.max(np.asarray(dist_P) / (n * mus)))
    t2 = float(np.max(np.asarray(dist_D) / (n * mus)))
    if t1 == 0.0 and t2 == 0.0:
        return MuHatEstimate(math.inf, 0.0, 0.0)
    inv = min(1.0 / t1 if t1 > 0 else math.inf, 1.0 / t2 if t2 > 0 else math.inf)
    return MuHatEstimate(inv / n, t1, t2)


def _left_mult_map(W, n):
    """Matrix of ``svec(H) -> vec(W^T H)``."""
    N = svec_dim(n)
    cols = []
    for q in range(N):
        e = np.zeros(N)
        e[q] = 1.0
        cols.append((W.T @ smat(e)).ravel())
    return np.array(cols).T if cols else np.zeros((0, N))


def estimate_mu_hat(
    inst: ParametricInstance,
    eps: float,
    samples: list[CentralSolution],
    part: PartitionApprox,
) -> MuHatEstimate:
    """Empirical Hoffman-type constants from distances to the optimal faces.

    The primal face hull is ``{X : A svec(X) = b, Q_{TN}^T X = 0}`` and the
    dual one ``{S : S - C_eps in range(A^T), Q_{BT}^T S = 0}``.
    """
    if len({s.mu for s in samples}) < 3:
        raise PreconditionError("need at least three samples at distinct mu")
    n = inst.n
    MP = _left_mult_map(part.Q_TN, n)
    AP = np.vstack([inst.Amat, MP])
    bP = np.concatenate([inst.b, np.zeros(MP.shape[0])])
    Nperp = null_space(inst.Amat).T
    MD = _left_mult_map(part.Q_BT, n)
    ceps = inst.c + eps * inst.cbar
    AD = np.vstack([Nperp, MD])
    bD = np.concatenate([Nperp @ ceps, np.zeros(MD.shape[0])])
    dP, dD = [], []
    for sol in samples:
        dP.append(project_affine(svec(sol.X), AP, bP, tol=1e-8)[1])
        dD.append(project_affine(svec(sol.S), AD, bD, tol=1e-8)[1])
    return mu_hat_from_distances(n, [s.mu for s in samples], dP, dD)


@dataclass
class Identification:
    """Outcome of the search for the largest identifying ``mu``.

    ``solution`` is the central solution at ``mu_breve``; ``trace`` holds
    every node visited, ``confirmed_at`` the index where the split was
    confirmed.
    """

    mu_breve: float
    partition: PartitionApprox
    solution: CentralSolution
    trace: PathTrace
    confirmed_at: int

    def __iter__(self):
        # allows ``mu_breve, part = find_mu_breve(...)``
        return iter((self.mu_breve, self.partition))


def nodes_per_decade(rate: float) -> int:
    return max(1, math.ceil(math.log(10.0) / -math.log(rate) - 1e-9))


def find_mu_breve(
    inst: ParametricInstance,
    eps: float,
    rate: float = DEFAULT_RATE,
    cutoff: float = DEFAULT_CUTOFF,
    mu_start: float = 1.0,
    mu_floor: float = MU_FLOOR,
    stable_nodes: int = 3,
    start: CentralSolution | None = None,
) -> Identification:
    """Decrease ``mu`` geometrically until the eigenvalue split is identified.

    At each node every eigen-direction is labelled by the cutoff rule.  A
    split is accepted once the labels have had the same block sizes for
    ``stable_nodes`` consecutive nodes and agree with the decay-rate labels
    measured over the preceding decade of ``mu``.  The returned ``mu_breve``
    is the first node of that constant run.
    """
    if not 0 < rate < 1:
        raise PreconditionError("rate must lie in (0, 1)")
    if cutoff <= 0:
        raise PreconditionError("cutoff must be positive")
    sol = start if start is not None else initial_center(inst, eps, mu_start)
    if not math.isclose(sol.mu, mu_start, rel_tol=1e-12):
        sol = newton_solve(inst, eps, mu_start, sol.point)
    W = nodes_per_decade(rate)
    trace = PathTrace()
    labels: list[list[str]] = []
    run_start = None
    k = 0
    while True:
        if k > 0:
            mu = mu_start * rate**k
            if mu < mu_floor:
                raise IdentificationError(
                    f"no stable split down to mu = {mu_floor:.1e} at eps = {eps:.6g}", trace
                )
            try:
                sol = newton_solve(inst, eps, mu, sol.point)
            except NonConvergenceError as exc:
                raise IdentificationError(
                    f"path solve failed at mu = {mu:.3e}, eps = {eps:.6g}: {exc}", trace
                ) from exc
        trace.append(sol)
        lab = cutoff_labels(trace.eig_X[k], trace.eig_S[k], cutoff)
        labels.append(lab)
        if "U" in lab:
            run_start = None
        elif run_start is None or _sizes(lab) != _sizes(labels[k - 1]):
            run_start = k
        if run_start is not None and k - run_start + 1 >= stable_nodes and k >= W:
            trend = trend_labels(trace.eig_X[k], trace.eig_X[k - W], trace[k].mu, trace[k - W].mu)
            if trend == lab:
                j = run_start
                ref = trace[j]
                w, V, s = _eigenframe(ref)
                part = _assemble(ref, w, V, s, labels[j])
                return Identification(ref.mu, part, ref, trace, k)
        k += 1


def _sizes(lab):
    return (lab.count("B"), lab.count("T"), lab.count("N"))


def partition_at(sol: CentralSolution, sizes: tuple[int, int, int]) -> PartitionApprox:
    """Split a central solution into blocks of prescribed sizes.

    The ``n_B`` largest ``X`` eigenvalues form B and the ``n_N`` smallest
    form N.
    """
    w, V, s = _eigenframe(sol)
    nB, nT, nN = sizes
    if nB + nT + nN != w.shape[0]:
        raise PreconditionError("block sizes must add up to n")
    labels = ["B"] * nB + ["T"] * nT + ["N"] * nN
    return _assemble(sol, w, V, s, labels)


@dataclass(frozen=True, eq=False)
class AnalyticCenter(PrimalDualPoint):
    """Analytic center of the optimal face with convergence information."""

    kkt_residual: float = 0.0
    face_residual: float = 0.0
    primal_face_dim: int = 0
    dual_face_dim: int = 0


def _logdet_center(u0, Z, u_start, what, tol=1e-12, max_iter=100):
    """Maximize ``log det smat(u0 + Z w)``; returns ``(u, grad_norm)``."""
    if Z.shape[1] == 0:
        U = smat(u0)
        if np.linalg.eigvalsh(U)[0] < -FACE_TOL:
            raise FaceInfeasibleError(f"{what} face is a single point outside the cone")
        return u0, 0.0
    w = Z.T @ (u_start - u0) if u_start is not None else np.zeros(Z.shape[1])
    if u_start is None or not _pd(smat(u0 + Z @ w)):
        base = smat(u0)
        dirs = [smat(z) for z in Z.T]
        w, t = _max_min_eig(base, dirs, goal=1e-2)
        if t <= 0:
            raise FaceInfeasibleError(f"{what} face has no relative interior point")
    gnorm = math.inf
    for _ in range(max_iter):
        U = smat(u0 + Z @ w)
        Ui = np.linalg.inv(U)
        g = Z.T @ svec(Ui)
        H = Z.T @ sym_kron(Ui, Ui) @ Z
        d = np.linalg.solve(H, g)
        dec = float(g @ d)
        gnorm = float(np.linalg.norm(g))
        if dec <= tol**2 or gnorm <= tol:
            break
        step = 1.0
        f0 = np.linalg.slogdet(U)[1]
        while step > 1e-14:
            Un = smat(u0 + Z @ (w + step * d))
            if _pd(Un) and np.linalg.slogdet(Un)[1] >= f0 + 0.25 * step * dec:
                break
            step *= 0.5
        else:
            break
        w = w + step * d
    U = smat(u0 + Z @ w)
    g = Z.T @ svec(np.linalg.inv(U))
    return u0 + Z @ w, float(np.linalg.norm(g))


def _pd(M) -> bool:
    try:
        np.linalg.cholesky(M)
        return True
    except np.linalg.LinAlgError:
        return False


def _congruence_map(Q):
    """Matrix of ``svec(U) -> svec(Q U Q^T)``."""
    n, k = Q.shape
    K = svec_dim(k)
    cols = []
    for q in range(K):
        e = np.zeros(K)
        e[q] = 1.0
        cols.append(svec(Q @ smat(e) @ Q.T))
    return np.array(cols).T if K else np.zeros((svec_dim(n), 0))


def _solve_face(M, rhs, what):
    """Least-squares particular solution and null space of ``M z = rhs``."""
    z0, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    res = float(np.linalg.norm(M @ z0 - rhs))
    if res > FACE_TOL * max(1.0, float(np.linalg.norm(rhs))):
        raise FaceInfeasibleError(f"{what} face equations are inconsistent (residual {res:.3e})")
    return z0, null_space(M), res


def analytic_center(
    inst: ParametricInstance,
    eps: float,
    part: PartitionApprox,
    start: PrimalDualPoint | CentralSolution | None = None,
) -> AnalyticCenter:
    """Maximize ``log det U_X + log det U_S`` over the optimal face.

    The face is parametrized as ``X = Q_B U_X Q_B^T`` with
    ``A svec(X) = b`` and ``S = Q_N U_S Q_N^T`` with
    ``A^T y + svec(S) = svec(C + eps Cbar)``.  The two sides decouple and
    each is solved by Newton's method on a null-space parametrization.
    Approximate blocks may make the face equations slightly inconsistent;
    the least-squares solution is used as long as the residual stays below
    ``1e-6``.

    Raises
    ------
    FaceInfeasibleError
        If the face equations are inconsistent or the face misses the
        interior of the compressed cone.
    """
    n, m = inst.n, inst.m
    if isinstance(start, CentralSolution):
        start = start.point
    QB, QN = part.Q_B, part.Q_N
    kB, kN = QB.shape[1], QN.shape[1]

    # primal side
    if kB == 0:
        if np.linalg.norm(inst.b) > FACE_TOL:
            raise FaceInfeasibleError("empty B block but b is nonzero")
        X = np.zeros((n, n))
        kkt_p, res_p, dim_p = 0.0, float(np.linalg.norm(inst.b)), 0
    else:
        G = np.array([svec(QB.T @ Ai @ QB) for Ai in inst.A]).reshape(m, svec_dim(kB))
        u0, Z, res_p = _solve_face(G, inst.b, "primal")
        u_start = svec(QB.T @ start.X @ QB) if start is not None else None
        u, kkt_p = _logdet_center(u0, Z, u_start, "primal")
        X = QB @ smat(u) @ QB.T
        dim_p = Z.shape[1]

    # dual side
    ceps = inst.c + eps * inst.cbar
    Md = np.hstack([inst.Amat.T, _congruence_map(QN)]) if kN else inst.Amat.T
    z0, Zd, res_d = _solve_face(Md, ceps, "dual")
    if kN == 0:
        y = z0[:m]
        S = np.zeros((n, n))
        kkt_d, dim_d = 0.0, Zd.shape[1]
    else:
        # y is determined by V, so optimize over the reachable V only
        Vc = _orth_cols(Zd[m:, :])
        v_start = svec(QN.T @ start.S @ QN) if start is not None else None
        v, kkt_d = _logdet_center(z0[m:], Vc, v_start, "dual")
        S = QN @ smat(v) @ QN.T
        rhs = ceps - svec(S)
        y, *_ = np.linalg.lstsq(inst.Amat.T, rhs, rcond=None)
        res_d = max(res_d, float(np.linalg.norm(inst.Amat.T @ y + svec(S) - ceps)))
        dim_d = Vc.shape[1]
    return AnalyticCenter(
        X=X,
        y=y,
        S=S,
        kkt_residual=max(kkt_p, kkt_d),
        face_residual=max(res_p, res_d),
        primal_face_dim=dim_p,
        dual_face_dim=dim_d,
    )


def _orth_cols(M, rtol=1e-9):
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rtol * max(1.0, s[0])))
    return U[:, :r]


def polish_limit(
    inst: ParametricInstance, eps: float, point: PrimalDualPoint, max_iter: int = 12
) -> tuple[PrimalDualPoint, bool]:
    """Undamped Newton on ``F(., 0, eps) = 0`` from an approximate limit point.

    Meant for a unique optimal pair, where the Jacobian at the limit is
    nonsingular but may be badly conditioned, so the residual is not a
    reliable merit function.  The iterate is kept when the step lengths
    settle and the result is feasible and (nearly) positive semidefinite;
    otherwise the input point is returned unchanged.
    """
    n, m = inst.n, inst.m
    v = point.as_vector()
    p = point
    scale = 1.0 + float(np.linalg.norm(v))
    for _ in range(max_iter):
        F = central_residual(inst, eps, 0.0, p)
        J = assemble_jacobian(p.X, p.S, inst)
        try:
            d = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return point, False
        v = v + d
        p = PrimalDualPoint.from_vector(v, n, m)
        if np.linalg.norm(d) <= 1e-10 * scale:
            break
    else:
        return point, False
    r = float(np.linalg.norm(central_residual(inst, eps, 0.0, p)))
    floor = -1e-8 * scale
    if r > 1e-10 * scale or eig_sym(p.X)[0][-1] < floor or eig_sym(p.S)[0][-1] < floor:
        return point, False
    return p, True


@dataclass
class LimitPoint:
    """Approximation of the limit of the central path at one ``eps``."""

    point: AnalyticCenter
    partition: PartitionApprox
    identification: Identification
    solution: CentralSolution
    polished: bool

    @property
    def X(self) -> np.ndarray:
        return self.point.X

    @property
    def S(self) -> np.ndarray:
        return self.point.S

    @property
    def y(self) -> np.ndarray:
        return self.point.y


def limit_point(
    inst: ParametricInstance,
    eps: float,
    ident: Identification | None = None,
    rate: float = DEFAULT_RATE,
    depth: float = 1e-6,
    mu_min: float = 1e-13,
    **kwargs,
) -> LimitPoint:
    """Analytic center of the optimal face, computed from the path.

    The path is followed past ``mu_breve`` down to
    ``max(depth * mu_breve, mu_min)``, split with the identified block
    sizes, and the analytic center of the resulting face is computed.  If
    both faces are single points the pair is refined by Newton's method
    at ``mu = 0``.
    """
    if ident is None:
        ident = find_mu_breve(inst, eps, rate=rate, **kwargs)
    sol = ident.solution
    mu_stop = max(depth * ident.mu_breve, mu_min)
    for mu in geometric_schedule(ident.mu_breve * rate, rate, mu_stop):
        try:
            sol = newton_solve(inst, eps, mu, sol.point)
        except NonConvergenceError:
            break
    part = partition_at(sol, ident.partition.sizes)
    ac = analytic_center(inst, eps, part, sol)
    polished = False
    if ac.primal_face_dim == 0 and ac.dual_face_dim == 0:
        p, polished = polish_limit(inst, eps, ac)
        if polished:
            ac = replace(ac, X=p.X, y=p.y, S=p.S)
    return LimitPoint(ac, part, ident, sol, polished)


__all__ = [
    "AnalyticCenter",
    "Identification",
    "LimitPoint",
    "MuHatEstimate",
    "PartitionApprox",
    "PartitionConstants",
    "analytic_center",
    "classify_cutoff",
    "classify_eigen",
    "compute_mu_tilde",
    "cutoff_labels",
    "estimate_mu_hat",
    "estimate_sigma",
    "find_mu_breve",
    "limit_point",
    "mu_hat_from_distances",
    "nodes_per_decade",
    "partition_at",
    "polish_limit",
    "trend_labels",
]
