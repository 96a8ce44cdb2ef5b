"""Perturbation bounds for the partition approximation at a fixed ``mu``.

Two central solutions at the same ``mu`` but different ``eps`` are
compared through their eigenspaces.  The Stewart-type bound uses the
measured difference of the solutions; the Kantorovich-type bound predicts
that difference from the Newton matrix at the reference solution alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .centralpath import CentralSolution, assemble_jacobian, central_residual
from .errors import PreconditionError
from .model import ParametricInstance
from .partition import PartitionApprox, partition_at
from .symlin import eig_sym, subspace_distance

STEWART_FACTOR = 4.0
GAP_FRACTION = 5.0


@dataclass(frozen=True)
class KantorovichData:
    """``delta``: smallest persisting eigenvalue; ``theta``: ``|J^-1|_2``;
    ``eta``: norm of the Newton step towards ``eps_prime``."""

    delta: float
    theta: float
    eta: float
    cbar_norm: float
    mu: float
    eps: float
    eps_prime: float
    jac_min_sv: float

    @property
    def step(self) -> float:
        return self.eps_prime - self.eps


@dataclass
class SensitivityReport:
    eps: float
    eps_prime: float
    mu: float
    comparable: bool
    xi_X: float = math.nan
    xi_S: float = math.nan
    gap_B: float = math.nan
    gap_N: float = math.nan
    stewart_B: float = math.nan
    stewart_N: float = math.nan
    applicable: bool = False
    actual_dist_B: float = math.nan
    actual_dist_N: float = math.nan
    kant_B: float = math.nan
    kant_N: float = math.nan

    def as_row(self) -> dict:
        return {
            "eps": self.eps,
            "eps_prime": self.eps_prime,
            "mu": self.mu,
            "dist_B": self.actual_dist_B,
            "dist_N": self.actual_dist_N,
            "stewart_B": self.stewart_B,
            "stewart_N": self.stewart_N,
            "kant_B": self.kant_B,
            "kant_N": self.kant_N,
            "applicable": int(self.applicable) if self.comparable else "not comparable",
        }


SENSITIVITY_COLUMNS = (
    "eps", "eps_prime", "mu", "dist_B", "dist_N", "stewart_B", "stewart_N", "kant_B", "kant_N", "applicable",
)


def _same_mu(a: CentralSolution, b: CentralSolution):
    if not math.isclose(a.mu, b.mu, rel_tol=1e-12):
        raise PreconditionError(f"central solutions have different mu ({a.mu:.6e} vs {b.mu:.6e})")


def xi_norms(sol0: CentralSolution, sol_eps: CentralSolution) -> tuple[float, float]:
    """Frobenius norms of ``X(eps') - X(eps)`` and ``S(eps') - S(eps)``."""
    _same_mu(sol0, sol_eps)
    return float(np.linalg.norm(sol_eps.X - sol0.X)), float(np.linalg.norm(sol_eps.S - sol0.S))


def spectral_gaps(sol: CentralSolution, sizes: tuple[int, int, int]) -> tuple[float, float]:
    """``lam_[n_B](X) - lam_[n_B+1](X)`` and the same for ``S`` at ``n_N``.

    Eigenvalues are in descending order; an empty block or a block that
    fills the whole space has an infinite gap.
    """
    nB, _, nN = sizes
    wx = eig_sym(sol.X)[0]
    ws = eig_sym(sol.S)[0]
    n = wx.shape[0]
    gB = wx[nB - 1] - wx[nB] if 0 < nB < n else math.inf
    gN = ws[nN - 1] - ws[nN] if 0 < nN < n else math.inf
    return float(gB), float(gN)


def stewart_bound(
    sol0: CentralSolution,
    part0: PartitionApprox,
    sol_eps: CentralSolution,
    part_eps: PartitionApprox | None = None,
) -> SensitivityReport:
    """Invariant-subspace bounds between two central solutions at one ``mu``.

    ``part_eps`` defaults to splitting ``sol_eps`` with the block sizes of
    ``part0``.  When both partitions are given with different sizes the
    report is returned with ``comparable = False``.
    """
    _same_mu(sol0, sol_eps)
    rep = SensitivityReport(eps=sol0.eps, eps_prime=sol_eps.eps, mu=sol0.mu, comparable=True)
    if part_eps is None:
        part_eps = partition_at(sol_eps, part0.sizes)
    elif part_eps.sizes != part0.sizes:
        rep.comparable = False
        return rep
    rep.xi_X, rep.xi_S = xi_norms(sol0, sol_eps)
    rep.gap_B, rep.gap_N = spectral_gaps(sol0, part0.sizes)
    XiX = sol_eps.X - sol0.X
    XiS = sol_eps.S - sol0.S
    QB, QN = part0.Q_B, part0.Q_N
    QTN = np.hstack([part0.Q_T, part0.Q_N])
    QBT = np.hstack([part0.Q_B, part0.Q_T])
    rep.stewart_B = STEWART_FACTOR * float(np.linalg.norm(QB.T @ XiX @ QTN)) / rep.gap_B
    rep.stewart_N = STEWART_FACTOR * float(np.linalg.norm(QN.T @ XiS @ QBT)) / rep.gap_N
    rep.applicable = bool(rep.xi_X <= rep.gap_B / GAP_FRACTION and rep.xi_S <= rep.gap_N / GAP_FRACTION)
    rep.actual_dist_B = subspace_distance(QB, part_eps.Q_B) if part0.n_B else 0.0
    rep.actual_dist_N = subspace_distance(QN, part_eps.Q_N) if part0.n_N else 0.0
    return rep


def kantorovich_quantities(
    inst: ParametricInstance,
    sol: CentralSolution,
    sizes: tuple[int, int, int],
    eps_prime: float | None = None,
) -> KantorovichData:
    """``delta``, ``theta`` and ``eta`` at a central solution.

    ``eta`` is the norm of ``J^-1 F(., mu, eps_prime)``; it vanishes for
    ``eps_prime = sol.eps``.  A singular Newton matrix gives
    ``theta = inf``.
    """
    nB, nT, nN = sizes
    eps_prime = sol.eps if eps_prime is None else float(eps_prime)
    wx = eig_sym(sol.X)[0]
    ws = eig_sym(sol.S)[0]
    cand = []
    if nB + nT:
        cand.append(wx[nB + nT - 1])
    if nN:
        cand.append(ws[nN - 1])
    delta = float(min(cand)) if cand else math.inf
    J = assemble_jacobian(sol.X, sol.S, inst)
    svals = np.linalg.svd(J, compute_uv=False)
    smin = float(svals[-1])
    cbar_norm = float(np.linalg.norm(inst.cbar))
    if smin <= np.finfo(float).eps * svals[0]:
        return KantorovichData(delta, math.inf, math.inf, cbar_norm, sol.mu, sol.eps, eps_prime, smin)
    F = central_residual(inst, eps_prime, sol.mu, sol.point)
    eta = float(np.linalg.norm(np.linalg.solve(J, F)))
    return KantorovichData(delta, 1.0 / smin, eta, cbar_norm, sol.mu, sol.eps, eps_prime, smin)


def safe_epsilon_radius(kd: KantorovichData, gaps: tuple[float, float]) -> float:
    """Largest ``|eps' - eps|`` covered by the existence theorem for perturbed centers."""
    if kd.cbar_norm == 0:
        return math.inf
    if not math.isfinite(kd.theta):
        raise PreconditionError("theta is infinite; the Newton matrix is singular")
    gB, gN = gaps
    return min(kd.delta / 2, 1.0 / (2 * kd.theta), gB / 10, gN / 10) / (kd.theta * kd.cbar_norm)


def kantorovich_radius(kd: KantorovichData, h: float | None = None) -> float:
    """Bound ``(1 - sqrt(1 - 2|h| theta^2 |Cbar|)) / theta`` on the change of the center."""
    h = kd.step if h is None else h
    rad = 1.0 - 2.0 * abs(h) * kd.theta**2 * kd.cbar_norm
    if rad < 0:
        raise PreconditionError("perturbation exceeds the Kantorovich radius")
    return (1.0 - math.sqrt(rad)) / kd.theta


def predicted_subspace_shift(
    kd: KantorovichData, gaps: tuple[float, float], h: float | None = None
) -> tuple[float, float]:
    """Subspace shift bounds for B and N implied by the Kantorovich estimate."""
    r = kantorovich_radius(kd, h)
    gB, gN = gaps
    return STEWART_FACTOR * r / gB, STEWART_FACTOR * r / gN


def compare(
    inst: ParametricInstance,
    sol0: CentralSolution,
    part0: PartitionApprox,
    sol_eps: CentralSolution,
    part_eps: PartitionApprox | None = None,
) -> SensitivityReport:
    """Stewart report completed with the Kantorovich prediction when it applies."""
    rep = stewart_bound(sol0, part0, sol_eps, part_eps)
    if not rep.comparable:
        return rep
    kd = kantorovich_quantities(inst, sol0, part0.sizes, sol_eps.eps)
    gaps = (rep.gap_B, rep.gap_N)
    try:
        if abs(kd.step) <= safe_epsilon_radius(kd, gaps):
            rep.kant_B, rep.kant_N = predicted_subspace_shift(kd, gaps)
    except PreconditionError:
        pass
    return rep


__all__ = [
    "KantorovichData",
    "SENSITIVITY_COLUMNS",
    "SensitivityReport",
    "compare",
    "kantorovich_quantities",
    "kantorovich_radius",
    "predicted_subspace_shift",
    "safe_epsilon_radius",
    "spectral_gaps",
    "stewart_bound",
    "xi_norms",
]
