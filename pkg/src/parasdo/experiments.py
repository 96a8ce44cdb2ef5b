"""Builders for the result tables and the bundled reproduction checks."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .centralpath import geometric_schedule, initial_center, newton_solve
from .errors import IdentificationError, NonConvergenceError, ParasdoError
from .fixtures import Fixture
from .intervals import (
    INVARIANCY,
    NONLINEARITY,
    TRANSITION,
    UNDETERMINED,
    classify_point,
    invariancy_boundaries,
    is_singleton,
    sweep,
    transition_points,
)
from .model import ParametricInstance
from .partition import (
    DEFAULT_CUTOFF,
    DEFAULT_RATE,
    find_mu_breve,
    limit_point,
    partition_at,
)
from .sensitivity import SensitivityReport, compare
from .symlin import subspace_distance

IDENT_EPS = (-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
DECADES = tuple(10.0**-k for k in range(5, 17))


def _dist(Q, ref):
    if ref is None or Q.shape[1] != ref.shape[1]:
        return math.nan
    if Q.shape[1] == 0:
        return 0.0
    return subspace_distance(Q, ref)


def _reference(inst, eps, fixture: Fixture | None, rate, cutoff):
    """Closed-form (X, S, B, N) when the fixture knows them, else computed."""
    known = fixture.known if fixture is not None else {}
    if "X" in known and "S" in known:
        Xa, Sa = known["X"](eps), known["S"](eps)
    else:
        lim = limit_point(inst, eps, rate=rate, cutoff=cutoff)
        Xa, Sa = lim.X, lim.S
    B = N = None
    if "partition" in known:
        B, _, N = known["partition"](eps)
    return Xa, Sa, B, N


def table_identification(
    inst: ParametricInstance,
    eps_list: Sequence[float],
    fixture: Fixture | None = None,
    rate: float = DEFAULT_RATE,
    cutoff: float = DEFAULT_CUTOFF,
) -> list[dict]:
    """Per ``eps``: ``mu_breve``, distances to the known partition and to the analytic center."""
    rows = []
    for eps in eps_list:
        t0 = time.perf_counter()
        try:
            ident = find_mu_breve(inst, eps, rate=rate, cutoff=cutoff)
            Xa, Sa, B, N = _reference(inst, eps, fixture, rate, cutoff)
        except (IdentificationError, NonConvergenceError) as exc:
            rows.append({"eps": eps, "status": f"nonconvergent: {exc}"})
            continue
        part, sol = ident.partition, ident.solution
        rows.append(
            {
                "eps": eps,
                "mu_breve": ident.mu_breve,
                "n_B": part.n_B,
                "n_T": part.n_T,
                "n_N": part.n_N,
                "dist_B": _dist(part.Q_B, B),
                "dist_N": _dist(part.Q_N, N),
                "err_X": float(np.linalg.norm(sol.X - Xa)),
                "err_S": float(np.linalg.norm(sol.S - Sa)),
                "seconds": time.perf_counter() - t0,
                "status": "ok",
            }
        )
    return rows


def _schedule_through(targets, rate, mu_start=1.0):
    """Geometric schedule from ``mu_start`` that also visits every target."""
    lo = min(targets)
    mus = set(geometric_schedule(mu_start, rate, lo))
    mus.update(targets)
    return sorted(mus, reverse=True)


def table_convergence(
    inst: ParametricInstance,
    eps: float,
    mus: Sequence[float] = DECADES,
    fixture: Fixture | None = None,
    rate: float = DEFAULT_RATE,
    cutoff: float = DEFAULT_CUTOFF,
) -> list[dict]:
    """Distances to the partition and the analytic center along the path at one ``eps``."""
    ident = find_mu_breve(inst, eps, rate=rate, cutoff=cutoff)
    sizes = ident.partition.sizes
    Xa, Sa, B, N = _reference(inst, eps, fixture, rate, cutoff)
    if B is None:
        lim = limit_point(inst, eps, ident=ident)
        B, N = lim.partition.Q_B, lim.partition.Q_N
    targets = sorted(set(float(m) for m in mus), reverse=True)
    sol = initial_center(inst, eps, 1.0)
    rows = []
    wanted = set(targets)
    for mu in _schedule_through(targets, rate):
        try:
            sol = newton_solve(inst, eps, mu, sol.point)
        except NonConvergenceError as exc:
            for t in sorted(wanted, reverse=True):
                rows.append({"mu": t, "status": f"nonconvergent: {exc}"})
            break
        if mu in wanted:
            wanted.discard(mu)
            part = partition_at(sol, sizes)
            rows.append(
                {
                    "mu": mu,
                    "dist_B": _dist(part.Q_B, B),
                    "dist_N": _dist(part.Q_N, N),
                    "err_X": float(np.linalg.norm(sol.X - Xa)),
                    "err_S": float(np.linalg.norm(sol.S - Sa)),
                    "status": "ok",
                }
            )
    return rows


def table_sensitivity(
    inst: ParametricInstance,
    center: float,
    eps_primes: Sequence[float],
    mu: float,
    rate: float = DEFAULT_RATE,
    cutoff: float = DEFAULT_CUTOFF,
    sizes: tuple[int, int, int] | None = None,
):
    """Sensitivity reports of the partition approximation around ``center`` at fixed ``mu``.

    Block sizes at every point come from :func:`find_mu_breve` unless
    ``sizes`` is given for all of them.
    """
    sol0 = initial_center(inst, center, mu)
    size0 = sizes or find_mu_breve(inst, center, rate=rate, cutoff=cutoff).partition.sizes
    part0 = partition_at(sol0, size0)
    reports = []
    for e in eps_primes:
        sol = newton_solve(inst, e, mu, sol0.point)
        size = sizes or find_mu_breve(inst, e, rate=rate, cutoff=cutoff).partition.sizes
        try:
            part = partition_at(sol, size)
        except ParasdoError:
            part = None
        if part is None or size != size0:
            reports.append(SensitivityReport(eps=center, eps_prime=e, mu=mu, comparable=False))
            continue
        reports.append(compare(inst, sol0, part0, sol, part))
    return reports


def table_analytic_centers(inst: ParametricInstance, eps_list: Sequence[float], entries=((0, 1), (3, 3))):
    rows = []
    for eps in eps_list:
        lim = limit_point(inst, eps)
        row = {"eps": eps}
        for i, j in entries:
            row[f"X{i + 1}{j + 1}"] = float(lim.X[i, j])
        row["primal_face_dim"] = lim.point.primal_face_dim
        row["polished"] = int(lim.polished)
        rows.append(row)
    return rows


def sweep_summary(classes) -> list[str]:
    lines = []
    for c in classes:
        lo, hi = c.support
        if c.is_point:
            why = next((d.message for d in c.evidence if d.message), "") if c.kind == UNDETERMINED else ""
            lines.append(f"{c.kind} at {lo:.3f}" + (f": {why}" if why else ""))
        else:
            b = ""
            if c.boundaries is not None:
                b = f" (boundaries {c.boundaries[0]:.6g}, {c.boundaries[1]:.6g})"
            lines.append(f"{c.kind} [{lo:.3f}, {hi:.3f}]{b}")
    return lines


# -- reproduction bundle -----------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


@dataclass
class Bundle:
    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    summaries: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


MU_BREVE_REFERENCE = {
    -1.0: 9.953e-06, -0.75: 4.975e-06, -0.5: 4.951e-11, -0.25: 8.734e-06, 0.0: 1.488e-05,
    0.25: 1.123e-05, 0.5: 9.953e-06, 0.75: 1.123e-05, 1.0: 1.488e-05, 1.25: 8.734e-06,
    1.5: 4.951e-11, 1.75: 4.975e-06, 2.0: 9.953e-06,
}


def _reproduce_elliptope(fx: Fixture, jobs: int, sweep_step: float) -> Bundle:
    inst = fx.instance
    out = Bundle()
    t1 = table_identification(inst, IDENT_EPS, fx)
    out.tables["identification"] = t1
    ok = all(r.get("status") == "ok" for r in t1)
    mb = {r["eps"]: r.get("mu_breve", math.nan) for r in t1}
    within = all(abs(math.log10(mb[e] / v)) <= 1 for e, v in MU_BREVE_REFERENCE.items())
    sep = min(mb[0.0], mb[0.5], mb[1.0]) / max(mb[-0.5], mb[1.5]) >= 1e4
    out.checks.append(Check("identification", ok and within and sep, f"mu_breve(0)={mb[0.0]:.3e}, mu_breve(-0.5)={mb[-0.5]:.3e}"))
    d = {r["eps"]: max(r["dist_B"], r["dist_N"]) for r in t1}
    acc = max(d[0.0], d[1.0]) <= 1e-10 and max(d[-1.0], d[-0.25], d[0.25], d[0.75], d[1.25]) <= 1e-5
    out.checks.append(Check("subspace accuracy", acc, f"max dist at 0/1: {max(d[0.0], d[1.0]):.3e}"))

    t2 = table_convergence(inst, -0.5, DECADES[6:], fx)
    t3 = table_convergence(inst, 0.0, DECADES, fx)
    out.tables["convergence_transition"], out.tables["convergence_center"] = t2, t3
    dB = {r["mu"]: r.get("dist_B", math.nan) for r in t2}
    ratios = [dB[10.0**-k] / dB[10.0**-(k + 1)] for k in (11, 12, 13)]
    rx = [r["err_X"] / r["mu"] for r in t3 if 1e-12 * 0.999 <= r["mu"] <= 1e-5 * 1.001 and r["status"] == "ok"]
    conv = all(2.5 <= q <= 4.0 for q in ratios) and (max(rx) - min(rx)) <= 0.1 * min(rx)
    out.checks.append(Check("convergence orders", conv, f"ratios {', '.join(f'{q:.3f}' for q in ratios)}"))

    t4 = table_sensitivity(inst, 0.0, [round(0.001 * k, 3) for k in range(-5, 6)], 1.41e-5)
    t5 = table_sensitivity(inst, 0.5, [round(0.5 + 0.001 * k, 3) for k in range(-5, 6)], 9.26e-6)
    out.tables["sensitivity_center_0"] = [r.as_row() for r in t4]
    out.tables["sensitivity_center_half"] = [r.as_row() for r in t5]
    r4 = next(r for r in t4 if r.eps_prime == -0.005)
    r5 = next(r for r in t5 if r.eps_prime == 0.499)
    close = (
        abs(r4.actual_dist_B / 4.698e-3 - 1) <= 0.05
        and abs(r4.stewart_B / 1.892e-2 - 1) <= 0.05
        and abs(r5.actual_dist_B / 1.414e-3 - 1) <= 0.05
        and abs(r5.stewart_B / 5.657e-3 - 1) <= 0.05
    )
    dom = all(r.actual_dist_B <= r.stewart_B + 1e-15 and r.actual_dist_N <= r.stewart_N + 1e-15 for r in t4 + t5 if r.applicable)
    out.checks.append(Check("sensitivity tables", close and dom, f"{r4.actual_dist_B:.4e}/{r4.stewart_B:.4e}, {r5.actual_dist_B:.4e}/{r5.stewart_B:.4e}"))

    b = {}
    for e in (-1.0, 2.0, 0.0):
        dg = classify_point(inst, e)
        b[e] = invariancy_boundaries(inst, e, dg.partition, dg.point)
    bnd = (
        b[-1.0][0] == -math.inf and abs(b[-1.0][1] + 0.5) <= 1e-6
        and b[2.0][1] == math.inf and abs(b[2.0][0] - 1.5) <= 1e-6
        and is_singleton(b[0.0]) and abs(b[0.0][0]) <= 1e-6
    )
    out.checks.append(Check("invariancy boundaries", bnd, "; ".join(f"{e}: ({v[0]:.7g}, {v[1]:.7g})" for e, v in b.items())))

    consistent = True
    diag_rows = []
    for e in (-1.0, 0.0, 0.25, 0.5, 1.0, 1.75):
        dg = classify_point(inst, e)
        flags = dg.strictly_complementary and dg.primal_nondegenerate and dg.dual_nondegenerate
        consistent &= flags == (dg.jac_min_sv > 1e-8)
        consistent &= dg.dual_nondegenerate == (e != 0.5)
        diag_rows.append(
            {"eps": e, "strict_comp": int(dg.strictly_complementary), "primal_nd": int(dg.primal_nondegenerate),
             "dual_nd": int(dg.dual_nondegenerate), "jac_min_sv": dg.jac_min_sv}
        )
    out.tables["nondegeneracy"] = diag_rows
    out.checks.append(Check("nondegeneracy vs Jacobian", consistent, "sampled eps -1, 0, 1/4, 1/2, 1, 7/4"))

    classes, diags = sweep(inst, (-1.0, 2.0), sweep_step, jobs=jobs)
    out.tables["sweep"] = (classes, diags)
    out.summaries["sweep"] = sweep_summary(classes)
    tps = transition_points(classes)
    kinds = [c.kind for c in classes]
    half = next((d for d in diags if d.eps == 0.5), None)
    sw_ok = (
        len(tps) == 2
        and abs(tps[0] + 0.5) <= 1e-3
        and abs(tps[1] - 1.5) <= 1e-3
        and kinds == [INVARIANCY, TRANSITION, NONLINEARITY, TRANSITION, INVARIANCY]
        and (half is None or (half.jac_min_sv < 1e-8 and 0.5 not in tps))
    )
    out.checks.append(Check("interval classification", sw_ok, "transitions " + ", ".join(f"{t:.4f}" for t in tps)))
    return out


def _reproduce_z_slack(fx: Fixture, jobs: int, sweep_step: float) -> Bundle:
    out = Bundle()
    classes, diags = sweep(fx.instance, (0.4, 0.6), sweep_step, jobs=jobs)
    out.tables["sweep"] = (classes, diags)
    out.summaries["sweep"] = sweep_summary(classes)
    tps = transition_points(classes)
    out.checks.append(Check("transition at 1/2", len(tps) == 1 and abs(tps[0] - 0.5) <= 1e-3, f"transitions {tps}"))
    return out


def _reproduce_redundant_row(fx: Fixture, jobs: int, sweep_step: float) -> Bundle:
    out = Bundle()
    eps_list = [0.5] + [0.5 + s * 10.0**-k for k in range(2, 7) for s in (-1, 1)]
    rows = table_analytic_centers(fx.instance, eps_list)
    out.tables["analytic_centers"] = rows
    c = rows[0]
    at_half = abs(c["X12"] + 1 / 3) <= 1e-6 and abs(c["X44"] - 8 / 3) <= 1e-6
    last = [r for r in rows if abs(r["eps"] - 0.5) <= 1.01e-6 and r["eps"] != 0.5]
    limit = all(abs(r["X12"]) <= 1e-3 and abs(r["X44"] - 2) <= 1e-3 for r in last)
    out.checks.append(Check("analytic center at 1/2", at_half, f"({c['X12']:.9f}, {c['X44']:.9f})"))
    out.checks.append(Check("discontinuous limit", limit, "; ".join(f"{r['eps']}: ({r['X12']:.2e}, {r['X44']:.6f})" for r in last)))
    return out


def _reproduce_constant(fx: Fixture, jobs: int, sweep_step: float) -> Bundle:
    out = Bundle()
    classes, diags = sweep(fx.instance, (-1.0, 2.0), max(sweep_step, 0.1), jobs=jobs)
    out.tables["sweep"] = (classes, diags)
    out.summaries["sweep"] = sweep_summary(classes)
    ok = len(classes) == 1 and classes[0].kind == INVARIANCY
    out.checks.append(Check("single invariancy interval", ok, "; ".join(out.summaries["sweep"])))
    return out


REPRODUCERS: dict[str, Callable[[Fixture, int, float], Bundle]] = {
    "elliptope3": _reproduce_elliptope,
    "elliptope3-z-slack": _reproduce_z_slack,
    "elliptope3-redundant-row": _reproduce_redundant_row,
    "elliptope3-constant": _reproduce_constant,
}


def reproduce(fx: Fixture, jobs: int = 1, sweep_step: float = 0.01) -> Bundle:
    return REPRODUCERS[fx.name](fx, jobs, sweep_step)


__all__ = [
    "Bundle",
    "Check",
    "DECADES",
    "IDENT_EPS",
    "reproduce",
    "sweep_summary",
    "table_analytic_centers",
    "table_convergence",
    "table_identification",
    "table_sensitivity",
]
