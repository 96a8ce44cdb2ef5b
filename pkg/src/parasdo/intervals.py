"""Classification of the parameter line.

Every grid value of ``eps`` is classified from the limit of its central
path: block sizes, strict complementarity, primal and dual nondegeneracy
and the smallest singular value of the Newton matrix at the limit.  Runs
of nodes are then grouped into invariancy and nonlinearity intervals, and
changes of the block sizes are located by bisection and confirmed as
transition points through the auxiliary problems for the invariancy set.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .centralpath import min_singular_value_J
from .errors import (
    FaceInfeasibleError,
    InfeasibleError,
    IdentificationError,
    NonConvergenceError,
    PreconditionError,
)
from .model import ParametricInstance, PrimalDualPoint, _max_min_eig
from .partition import (
    DEFAULT_CUTOFF,
    DEFAULT_RATE,
    FACE_TOL,
    PartitionApprox,
    _congruence_map,
    _orth_cols,
    _pd,
    _solve_face,
    limit_point,
)
from .symlin import eig_sym, null_space, smat, subspace_distance, svec, svec_dim, sym_kron

RANK_TOL = 1e-7
SINGULAR_TOL = 1e-8
DRIFT_TOL = 1e-6
SINGLETON_TOL = 1e-6
UNBOUNDED = 1e8

INVARIANCY = "invariancy-interval"
NONLINEARITY = "nonlinearity-interval"
TRANSITION = "transition-point"
UNDETERMINED = "undetermined"


@dataclass
class PointDiagnostics:
    """Diagnostics of the optimal pair at one parameter value.

    ``partition`` is ``None`` (and ``determined`` false) when the path
    could not be followed far enough to identify the blocks.
    """

    eps: float
    n_B: int = 0
    n_T: int = 0
    n_N: int = 0
    strictly_complementary: bool = False
    primal_nondegenerate: bool = False
    dual_nondegenerate: bool = False
    jac_min_sv: float = math.nan
    partition: PartitionApprox | None = None
    mu_breve: float = math.nan
    point: PrimalDualPoint | None = None
    determined: bool = True
    message: str = ""

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.n_B, self.n_T, self.n_N)

    @property
    def nonsingular(self) -> bool:
        return self.jac_min_sv > SINGULAR_TOL

    def objective_value(self, inst: ParametricInstance) -> float:
        return float(np.vdot(inst.objective(self.eps), self.point.X))


@dataclass
class EpsilonClassification:
    kind: str
    support: tuple[float, float]
    evidence: list = field(default_factory=list)
    boundaries: tuple[float, float] | None = None

    @property
    def is_point(self) -> bool:
        return self.support[0] == self.support[1]

    def contains(self, eps: float) -> bool:
        lo, hi = self.support
        return lo <= eps <= hi


# -- pointwise tests ----------------------------------------------------------


def check_strict_complementarity(X, S, tol: float = RANK_TOL) -> tuple[bool, int]:
    """``(X + S > tol, number of eigenvalues of X + S below tol)``."""
    X = np.asarray(X, dtype=float)
    w = eig_sym(X + np.asarray(S, dtype=float))[0]
    n_T = int(np.sum(w <= tol))
    return n_T == 0, n_T


def _rank(vectors, tol):
    if len(vectors) == 0:
        return 0
    s = np.linalg.svd(np.array(vectors), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def check_primal_nondegenerate(inst: ParametricInstance, X, tol: float = RANK_TOL) -> bool:
    """Linear independence of the bordered compressions of the constraints.

    With ``X = M1 diag(lam) M1^T`` (positive part) and ``M2`` completing
    the basis, the matrices ``[[M1^T A M1, M1^T A M2], [M2^T A M1, 0]]``
    must be linearly independent.
    """
    w, V = eig_sym(X)
    r = int(np.sum(w > tol * max(1.0, abs(w[0]))))
    n = inst.n
    if inst.m > svec_dim(n) - svec_dim(n - r):
        return False
    M1, M2 = V[:, :r], V[:, r:]
    vecs = []
    for Ai in inst.A:
        B = np.zeros((n, n))
        B[:r, :r] = M1.T @ Ai @ M1
        B[:r, r:] = M1.T @ Ai @ M2
        B[r:, :r] = B[:r, r:].T
        vecs.append(svec(B))
    return _rank(vecs, tol) == inst.m


def check_dual_nondegenerate(inst: ParametricInstance, S, tol: float = RANK_TOL) -> bool:
    """Whether ``{N1^T A_i N1}`` spans the symmetric matrices on ``ker S``."""
    w, V = eig_sym(S)
    r = int(np.sum(w > tol * max(1.0, abs(w[0]))))
    k = inst.n - r
    if k == 0:
        return True
    N1 = V[:, r:]
    vecs = [svec(N1.T @ Ai @ N1) for Ai in inst.A]
    return _rank(vecs, tol) == svec_dim(k)


# -- auxiliary problems ---------------------------------------------------------


def _barrier_extreme(e, u0, Zu, w0, sign, k, t_max=1e9):
    """Extreme of ``sign * e.w`` over ``smat(u0 + Zu w) > 0`` (log-det path)."""
    w = w0.copy()
    val = float(e @ w)
    t = 1.0
    while True:
        for _ in range(100):
            U = smat(u0 + Zu @ w)
            Ui = np.linalg.inv(U)
            g = sign * t * e + Zu.T @ svec(Ui)
            H = Zu.T @ sym_kron(Ui, Ui) @ Zu
            d = np.linalg.solve(H, g)
            dec = float(g @ d)
            if dec <= 1e-10:
                break
            f0 = sign * t * val + np.linalg.slogdet(U)[1]
            step = 1.0
            while step > 1e-14:
                wn = w + step * d
                Un = smat(u0 + Zu @ wn)
                if _pd(Un) and sign * t * float(e @ wn) + np.linalg.slogdet(Un)[1] >= f0 + 0.25 * step * dec:
                    break
                step *= 0.5
            else:
                break
            w = wn
            val = float(e @ w)
            if abs(val) > UNBOUNDED:
                return sign * math.inf
        if t >= t_max:
            break
        t *= 10.0
    # the barrier optimum is within k / t of the supremum
    return val + sign * k / t


def invariancy_boundaries(
    inst: ParametricInstance, eps_bar: float, part: PartitionApprox, start: PrimalDualPoint | None = None
) -> tuple[float, float]:
    """Endpoints of the invariancy set containing ``eps_bar``.

    The set is the projection onto ``eps`` of
    ``{(y, U, eps): A^T y + svec(Q_N U Q_N^T) = c + eps cbar, U > 0}``.
    Both extremes are approached along a log-det barrier path; values
    beyond ``1e8`` in magnitude are reported as infinite.  The result
    always brackets ``eps_bar``.

    Raises
    ------
    PreconditionError
        If the linear system of the auxiliary problem is inconsistent.
    """
    m = inst.m
    QN = part.Q_N
    k = QN.shape[1]
    K = svec_dim(k)
    M = np.hstack([inst.Amat.T, _congruence_map(QN), -inst.cbar[:, None]])
    try:
        z0, Z, _ = _solve_face(M, inst.c, "auxiliary")
    except FaceInfeasibleError as exc:
        raise PreconditionError(f"partition does not define a feasible auxiliary problem: {exc}") from exc
    eps_bar = float(eps_bar)
    e = Z[-1, :]
    if np.linalg.norm(e) <= 1e-9:
        return eps_bar, eps_bar
    Zu = Z[m:m + K, :]
    free = null_space(Zu) if Zu.size else np.eye(Z.shape[1])
    if free.shape[1] and np.linalg.norm(e @ free) > 1e-9:
        return -math.inf, math.inf
    # restrict to the directions that move U
    R = _orth_cols(Zu.T)
    e_r, Zu_r = e @ R, Zu @ R
    if np.linalg.norm(e_r) <= 1e-9:
        return eps_bar, eps_bar
    # shift the particular solution to eps_bar
    s = (eps_bar - z0[-1]) / float(e_r @ e_r)
    u0 = z0[m:m + K] + Zu_r @ (s * e_r)
    e0 = eps_bar
    if start is not None:
        w0 = np.linalg.lstsq(Zu_r, svec(QN.T @ start.S @ QN) - u0, rcond=None)[0]
        w0 = w0 - e_r * float(e_r @ w0) / float(e_r @ e_r)
    else:
        w0 = np.zeros(R.shape[1])
    if not _pd(smat(u0 + Zu_r @ w0)):
        w0, lam = _max_min_eig(smat(u0), [smat(z) for z in Zu_r.T], goal=1e-3)
        if lam <= 0:
            raise PreconditionError("no strictly feasible point for the auxiliary problem")
    hi = e0 + _barrier_extreme(e_r, u0, Zu_r, w0, 1.0, k)
    lo = e0 + _barrier_extreme(e_r, u0, Zu_r, w0, -1.0, k)
    return min(lo, eps_bar), max(hi, eps_bar)


def is_singleton(bounds: tuple[float, float], tol: float = SINGLETON_TOL) -> bool:
    lo, hi = bounds
    return hi - lo <= tol


# -- classification -------------------------------------------------------------


def classify_point(
    inst: ParametricInstance,
    eps: float,
    rate: float = DEFAULT_RATE,
    cutoff: float = DEFAULT_CUTOFF,
    tol: float = RANK_TOL,
) -> PointDiagnostics:
    """Diagnostics at ``eps`` from the limit of the central path.

    Path failures are reported through ``determined = False`` rather than
    raised.
    """
    eps = float(eps)
    try:
        lim = limit_point(inst, eps, rate=rate, cutoff=cutoff)
    except InfeasibleError as exc:
        # no interior dual point: v(eps) is likely -inf, but nothing is certified
        msg = f"dual objective unbounded suspected ({exc})" if exc.side == "dual" else str(exc)
        return PointDiagnostics(eps=eps, determined=False, message=msg)
    except (IdentificationError, NonConvergenceError, PreconditionError) as exc:
        return PointDiagnostics(eps=eps, determined=False, message=str(exc))
    p = lim.point
    part = lim.partition
    return PointDiagnostics(
        eps=eps,
        n_B=part.n_B,
        n_T=part.n_T,
        n_N=part.n_N,
        strictly_complementary=part.n_T == 0,
        primal_nondegenerate=check_primal_nondegenerate(inst, p.X, tol),
        dual_nondegenerate=check_dual_nondegenerate(inst, p.S, tol),
        jac_min_sv=min_singular_value_J(inst, p),
        partition=part,
        mu_breve=lim.identification.mu_breve,
        point=PrimalDualPoint(p.X, p.y, p.S),
    )


def _classify_task(args):
    inst, eps, rate, cutoff = args
    return classify_point(inst, eps, rate, cutoff)


def grid(lo: float, hi: float, step: float) -> list[float]:
    """Nodes ``lo, lo + step, ...`` up to ``hi``, rounded to 12 decimals."""
    if step <= 0 or hi < lo:
        raise PreconditionError("need lo <= hi and a positive step")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + j * step, 12) for j in range(k + 1)]


def classify_many(inst, eps_values, rate=DEFAULT_RATE, cutoff=DEFAULT_CUTOFF, jobs: int = 1) -> list[PointDiagnostics]:
    """:func:`classify_point` over many values; order of the input is kept."""
    tasks = [(inst, float(e), rate, cutoff) for e in eps_values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_classify_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_classify_task(t) for t in tasks]


def _same_partition(a: PointDiagnostics, b: PointDiagnostics, tol=DRIFT_TOL) -> bool:
    pa, pb = a.partition, b.partition
    if a.sizes != b.sizes:
        return False
    dB = subspace_distance(pa.Q_B, pb.Q_B) if pa.n_B else 0.0
    dN = subspace_distance(pa.Q_N, pb.Q_N) if pa.n_N else 0.0
    return max(dB, dN) <= tol


def _boundaries(inst, d: PointDiagnostics):
    try:
        return invariancy_boundaries(inst, d.eps, d.partition, d.point)
    except (PreconditionError, np.linalg.LinAlgError):
        return None


class _Sweeper:
    def __init__(self, inst, rate, cutoff, refine_tol):
        self.inst = inst
        self.rate = rate
        self.cutoff = cutoff
        self.refine_tol = refine_tol
        self.cache: dict[float, PointDiagnostics] = {}

    def diag(self, eps):
        eps = round(float(eps), 12)
        if eps not in self.cache:
            self.cache[eps] = classify_point(self.inst, eps, self.rate, self.cutoff)
        return self.cache[eps]

    def singleton(self, d):
        if not d.determined:
            return False
        b = _boundaries(self.inst, d)
        return b is not None and is_singleton(b)

    def locate(self, left: PointDiagnostics, right: PointDiagnostics):
        """Transition between two nodes with different block sizes.

        Returns ``(classification, evidence)``; the classification is a
        transition point if one is confirmed, otherwise an undetermined
        bracket.
        """
        lo, hi = left, right
        while hi.eps - lo.eps > self.refine_tol:
            mid = self.diag(0.5 * (lo.eps + hi.eps))
            if not mid.determined:
                break
            if mid.sizes == lo.sizes:
                lo = mid
            elif mid.sizes == hi.sizes:
                hi = mid
            else:
                # a third partition: the midpoint itself may be the transition
                if self.singleton(mid):
                    return EpsilonClassification(TRANSITION, (mid.eps, mid.eps), [lo, mid, hi], (mid.eps, mid.eps))
                break
        candidates = []
        for d in (lo, hi):
            b = _boundaries(self.inst, d)
            if b is None or is_singleton(b):
                continue
            for edge in b:
                if math.isfinite(edge) and lo.eps - SINGLETON_TOL <= edge <= hi.eps + SINGLETON_TOL:
                    candidates.append(edge)
        eps_t = candidates[0] if candidates else 0.5 * (lo.eps + hi.eps)
        d = self.diag(eps_t)
        if self.singleton(d):
            return EpsilonClassification(TRANSITION, (d.eps, d.eps), [lo, d, hi], (d.eps, d.eps))
        return EpsilonClassification(UNDETERMINED, (lo.eps, hi.eps), [lo, d, hi])


def sweep(
    inst: ParametricInstance,
    eps_range: tuple[float, float] | None = None,
    step: float | None = None,
    nodes: Iterable[float] | None = None,
    refine_tol: float = 1e-3,
    rate: float = DEFAULT_RATE,
    cutoff: float = DEFAULT_CUTOFF,
    jobs: int = 1,
) -> tuple[list[EpsilonClassification], list[PointDiagnostics]]:
    """Classify a parameter range into intervals and transition points.

    Either ``eps_range`` with ``step`` or an explicit list of ``nodes`` is
    required.  Returns the ordered classifications and the diagnostics of
    every grid node.
    """
    if nodes is None:
        if eps_range is None or step is None:
            raise PreconditionError("give eps_range and step, or nodes")
        nodes = grid(eps_range[0], eps_range[1], step)
    nodes = sorted({round(float(e), 12) for e in nodes})
    if not nodes:
        raise PreconditionError("empty parameter grid")
    sw = _Sweeper(inst, rate, cutoff, refine_tol)
    diags = classify_many(inst, nodes, rate, cutoff, jobs)
    for d in diags:
        sw.cache[d.eps] = d
    good = [d for d in diags if d.determined]
    out: list[EpsilonClassification] = []
    for d in diags:
        if not d.determined:
            out.append(EpsilonClassification(UNDETERMINED, (d.eps, d.eps), [d]))

    # maximal runs of equal block sizes
    runs: list[list[PointDiagnostics]] = []
    for d in good:
        if runs and runs[-1][-1].sizes == d.sizes:
            runs[-1].append(d)
        else:
            runs.append([d])

    pieces: list[EpsilonClassification] = []
    point_runs = set()
    for i, run in enumerate(runs):
        if len(run) == 1 and len(runs) > 1 and sw.singleton(run[0]):
            # isolated node with its own block sizes
            pieces.append(EpsilonClassification(TRANSITION, (run[0].eps, run[0].eps), run, (run[0].eps,) * 2))
            point_runs.add(i)
            continue
        pieces.extend(_split_run(inst, run))
    # transitions between runs that are not single transition nodes
    for i in range(len(runs) - 1):
        if i in point_runs or i + 1 in point_runs:
            continue
        pieces.append(sw.locate(runs[i][-1], runs[i + 1][0]))
    pieces.sort(key=lambda c: (c.support[0], c.support[1]))
    _stretch(pieces)
    out.extend(pieces)
    out.sort(key=lambda c: (c.support[0], c.support[1]))
    return out, diags


def _split_run(inst, run):
    """Split a run of equal sizes into invariancy and nonlinearity pieces."""
    if len(run) == 1:
        d = run[0]
        b = _boundaries(inst, d)
        kind = INVARIANCY if b is not None and not is_singleton(b) else NONLINEARITY
        return [EpsilonClassification(kind, (d.eps, d.eps), run, b)]
    same = [_same_partition(a, b) for a, b in zip(run, run[1:])]
    pieces = []
    start = 0
    for j in range(1, len(same) + 1):
        if j == len(same) or same[j] != same[start]:
            seg = run[start:j + 1]
            kind = INVARIANCY if same[start] else NONLINEARITY
            b = _boundaries(inst, seg[len(seg) // 2]) if kind == INVARIANCY else None
            pieces.append(EpsilonClassification(kind, (seg[0].eps, seg[-1].eps), seg, b))
            start = j
    return pieces


def _stretch(pieces):
    """Extend interval supports to the neighbouring transition points."""
    for i, c in enumerate(pieces):
        if c.kind not in (INVARIANCY, NONLINEARITY):
            continue
        lo, hi = c.support
        if i > 0 and pieces[i - 1].kind == TRANSITION:
            lo = pieces[i - 1].support[0]
        if i + 1 < len(pieces) and pieces[i + 1].kind == TRANSITION:
            hi = pieces[i + 1].support[0]
        c.support = (lo, hi)


def node_kind(eps: float, classes: Sequence[EpsilonClassification]) -> str:
    """Kind of the classification a grid node belongs to (points first)."""
    for c in classes:
        if c.is_point and c.support[0] == eps:
            return c.kind
    for c in classes:
        if not c.is_point and c.kind != UNDETERMINED and any(d.eps == eps for d in c.evidence):
            return c.kind
    return UNDETERMINED


SWEEP_COLUMNS = (
    "eps", "n_B", "n_T", "n_N", "strict_comp", "primal_nd", "dual_nd", "jac_min_sv", "mu_breve", "kind",
)


def sweep_rows(diags: Sequence[PointDiagnostics], classes: Sequence[EpsilonClassification]) -> list[dict]:
    rows = []
    for d in diags:
        rows.append(
            {
                "eps": d.eps,
                "n_B": d.n_B if d.determined else "",
                "n_T": d.n_T if d.determined else "",
                "n_N": d.n_N if d.determined else "",
                "strict_comp": int(d.strictly_complementary) if d.determined else "",
                "primal_nd": int(d.primal_nondegenerate) if d.determined else "",
                "dual_nd": int(d.dual_nondegenerate) if d.determined else "",
                "jac_min_sv": d.jac_min_sv,
                "mu_breve": d.mu_breve,
                "kind": node_kind(d.eps, classes),
            }
        )
    return rows


def transition_points(classes: Sequence[EpsilonClassification]) -> list[float]:
    return [c.support[0] for c in classes if c.kind == TRANSITION]


__all__ = [
    "EpsilonClassification",
    "PointDiagnostics",
    "SWEEP_COLUMNS",
    "check_dual_nondegenerate",
    "check_primal_nondegenerate",
    "check_strict_complementarity",
    "classify_many",
    "classify_point",
    "grid",
    "invariancy_boundaries",
    "is_singleton",
    "node_kind",
    "sweep",
    "sweep_rows",
    "transition_points",
]
