import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import diagnostics, exact_partition
from parasdo.centralpath import central_residual, min_singular_value_J
from parasdo.errors import PreconditionError
from parasdo.experiments import sweep_summary
from parasdo.fixtures import elliptope_partition, elliptope_S, elliptope_X, elliptope_y, get_fixture
from parasdo.intervals import (
    INVARIANCY,
    NONLINEARITY,
    TRANSITION,
    UNDETERMINED,
    EpsilonClassification,
    PointDiagnostics,
    check_dual_nondegenerate,
    check_primal_nondegenerate,
    check_strict_complementarity,
    classify_many,
    grid,
    invariancy_boundaries,
    is_singleton,
    node_kind,
    sweep,
    sweep_rows,
    transition_points,
)
from parasdo.model import ParametricInstance, PrimalDualPoint


def exact(eps):
    return exact_partition(*elliptope_partition(eps), eps=eps)


# -- pointwise checks -----------------------------------------------------------------


def test_strict_complementarity_checks():
    assert check_strict_complementarity(elliptope_X(0.0), elliptope_S(0.0)) == (True, 0)
    assert check_strict_complementarity(elliptope_X(-0.5), elliptope_S(-0.5)) == (False, 1)
    assert check_strict_complementarity(np.zeros((1, 1)), np.zeros((1, 1)))[0] is False


def test_primal_nondegeneracy(ell):
    assert check_primal_nondegenerate(ell, elliptope_X(0.0))
    assert check_primal_nondegenerate(ell, elliptope_X(0.5))
    # X = 0 leaves no room for m independent bordered matrices
    assert not check_primal_nondegenerate(ell, np.zeros((3, 3)))


def test_primal_nondegeneracy_bordered_oracle(ell):
    # oracle: build the three bordered matrices explicitly and rank them
    w, V = np.linalg.eigh(elliptope_X(0.0))
    M1, M2 = V[:, w > 1e-9], V[:, w <= 1e-9]
    mats = []
    for Ai in ell.A:
        top = np.hstack([M1.T @ Ai @ M1, M1.T @ Ai @ M2])
        bottom = np.hstack([M2.T @ Ai @ M1, np.zeros((1, 1))])
        mats.append(np.vstack([top, bottom]).ravel())
    assert np.linalg.matrix_rank(np.array(mats), tol=1e-9) == 3


def test_dual_nondegeneracy(ell):
    assert check_dual_nondegenerate(ell, elliptope_S(0.0))
    assert not check_dual_nondegenerate(ell, elliptope_S(0.5))
    assert check_dual_nondegenerate(ell, np.eye(3))


def test_dual_nondegeneracy_oracle(ell):
    # the compressed 2x2 matrices must span the 3-dimensional space S^2
    for eps, expected in ((0.0, 3), (0.5, 2)):
        w, V = np.linalg.eigh(elliptope_S(eps))
        N1 = V[:, w <= 1e-9]
        mats = np.array([(N1.T @ Ai @ N1)[np.triu_indices(2)] for Ai in ell.A])
        assert np.linalg.matrix_rank(mats, tol=1e-9) == expected


# -- invariancy boundaries ---------------------------------------------------------------


def test_boundaries_exact_partitions(ell):
    lo, hi = invariancy_boundaries(ell, -1.0, exact(-1.0))
    assert lo == -math.inf and abs(hi + 0.5) <= 1e-6
    lo, hi = invariancy_boundaries(ell, 2.0, exact(2.0))
    assert hi == math.inf and abs(lo - 1.5) <= 1e-6
    lo, hi = invariancy_boundaries(ell, 0.0, exact(0.0))
    assert is_singleton((lo, hi)) and abs(lo) <= 1e-6
    assert lo <= 0.0 <= hi


def test_boundaries_bracket_the_reference(ell):
    for eps in (-3.0, -0.7):
        lo, hi = invariancy_boundaries(ell, eps, exact(eps))
        assert lo <= eps <= hi


def test_boundaries_inconsistent_partition(ell):
    e1 = np.eye(3)[:, :1]
    with pytest.raises(PreconditionError):
        invariancy_boundaries(ell, 0.0, exact_partition(np.eye(3)[:, 1:], np.zeros((3, 0)), e1))


def test_boundaries_constant_objective():
    inst = get_fixture("elliptope3-constant").instance
    assert invariancy_boundaries(inst, 0.0, exact(0.0)) == (-math.inf, math.inf)


# -- classification ---------------------------------------------------------------------


def test_classify_point_half():
    d = diagnostics("elliptope3", 0.5)
    assert d.determined and d.sizes == (2, 0, 1)
    assert d.strictly_complementary and d.primal_nondegenerate
    assert not d.dual_nondegenerate
    assert d.jac_min_sv < 1e-8
    ell = get_fixture("elliptope3").instance
    assert is_singleton(invariancy_boundaries(ell, 0.5, d.partition, d.point))


def test_classify_point_transition():
    d = diagnostics("elliptope3", -0.5)
    assert d.sizes == (1, 1, 1) and d.n_T == 1
    assert not d.strictly_complementary
    assert not d.nonsingular


def test_classify_point_invariancy():
    d = diagnostics("elliptope3", -1.0)
    assert d.sizes == (1, 0, 2)
    assert d.strictly_complementary and d.primal_nondegenerate and d.dual_nondegenerate
    assert d.nonsingular


@pytest.mark.parametrize("eps", [-1.0, -0.5, 0.0, 0.25, 0.5, 1.0, 1.5, 1.75])
def test_diagnostics_invariants(eps):
    d = diagnostics("elliptope3", eps)
    assert d.strictly_complementary == (d.n_T == 0)
    assert d.jac_min_sv >= 0
    # nonsingularity holds exactly when all three conditions hold
    assert (d.strictly_complementary and d.primal_nondegenerate and d.dual_nondegenerate) == d.nonsingular


def test_classify_point_undetermined():
    ell = get_fixture("elliptope3").instance
    d = classify_many(ell, [0.0], cutoff=1e-30)[0]
    assert not d.determined and d.message


def test_grid():
    assert grid(-1.0, 1.0, 0.5) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert grid(0.0, 0.3, 0.1) == [0.0, 0.1, 0.2, 0.3]
    with pytest.raises(PreconditionError):
        grid(1.0, 0.0, 0.1)


def test_epsilon_classification_support():
    c = EpsilonClassification(TRANSITION, (0.5, 0.5))
    assert c.is_point and c.contains(0.5) and not c.contains(0.6)


# -- invariancy properties -----------------------------------------------------------------


@pytest.fixture(scope="module")
def left_pair():
    return diagnostics("elliptope3", -1.0), diagnostics("elliptope3", -0.75)


@settings(derandomize=True, max_examples=30, deadline=None)
@given(rho=st.floats(0.0, 1.0))
def test_invariancy_convexity(left_pair, rho):
    ell = get_fixture("elliptope3").instance
    a, b = left_pair
    eps = rho * a.eps + (1 - rho) * b.eps
    p = PrimalDualPoint(
        rho * a.point.X + (1 - rho) * b.point.X,
        rho * a.point.y + (1 - rho) * b.point.y,
        rho * a.point.S + (1 - rho) * b.point.S,
    )
    assert np.linalg.norm(central_residual(ell, eps, 0.0, p)) <= 1e-8
    QB, QN = a.partition.Q_B, a.partition.Q_N
    assert np.linalg.eigvalsh(QB.T @ p.X @ QB)[0] > 1e-8
    assert np.linalg.eigvalsh(QN.T @ p.S @ QN)[0] > 1e-8


@settings(derandomize=True, max_examples=30, deadline=None)
@given(rho=st.floats(0.0, 1.0))
def test_value_function_linear_on_invariancy(left_pair, rho):
    ell = get_fixture("elliptope3").instance
    a, b = left_pair
    eps = rho * a.eps + (1 - rho) * b.eps
    # the primal optimum is constant on the interval, so v is linear there
    v = float(np.vdot(ell.objective(eps), a.point.X))
    assert abs(v - rho * a.objective_value(ell) - (1 - rho) * b.objective_value(ell)) <= 1e-8


def test_limit_points_match_closed_forms():
    ell = get_fixture("elliptope3").instance
    for eps in (-1.0, 0.25, 2.0):
        d = diagnostics("elliptope3", eps)
        assert np.linalg.norm(d.point.X - elliptope_X(eps)) <= 1e-8
        assert np.linalg.norm(d.point.S - elliptope_S(eps)) <= 1e-8
        assert np.linalg.norm(d.point.y - elliptope_y(eps)) <= 1e-8
        assert math.isclose(d.jac_min_sv, min_singular_value_J(ell, d.point))


# -- sweeps ----------------------------------------------------------------------------------


def test_sweep_constant_objective():
    inst = get_fixture("elliptope3-constant").instance
    classes, diags = sweep(inst, nodes=[-1.0, 0.0, 1.0])
    assert len(classes) == 1
    c = classes[0]
    assert c.kind == INVARIANCY and c.support == (-1.0, 1.0)
    assert c.boundaries == (-math.inf, math.inf)


def test_sweep_z_slack():
    inst = get_fixture("elliptope3-z-slack").instance
    classes, diags = sweep(inst, (0.4, 0.6), 0.05)
    tps = transition_points(classes)
    assert len(tps) == 1 and abs(tps[0] - 0.5) <= 1e-3
    kinds = [c.kind for c in classes]
    assert kinds == [NONLINEARITY, TRANSITION, NONLINEARITY]
    # rank invariance inside each nonlinearity interval
    for c in classes:
        if c.kind == NONLINEARITY:
            assert len({d.sizes for d in c.evidence}) == 1
    rows = sweep_rows(diags, classes)
    assert [r["kind"] for r in rows if r["eps"] == 0.5] == [TRANSITION]
    assert node_kind(0.4, classes) == NONLINEARITY


def test_sweep_left_flank():
    ell = get_fixture("elliptope3").instance
    classes, _ = sweep(ell, (-1.0, 0.0), 0.25)
    kinds = [c.kind for c in classes]
    assert kinds == [INVARIANCY, TRANSITION, NONLINEARITY]
    assert abs(transition_points(classes)[0] + 0.5) <= 1e-6
    inv = classes[0]
    assert inv.boundaries[0] == -math.inf and abs(inv.boundaries[1] + 0.5) <= 1e-6


def test_sweep_marks_undetermined_nodes():
    ell = get_fixture("elliptope3").instance
    classes, diags = sweep(ell, nodes=[0.0, 0.25], cutoff=1e-30)
    assert all(c.kind == UNDETERMINED for c in classes)
    assert all(not d.determined for d in diags)


def test_sweep_needs_a_grid():
    ell = get_fixture("elliptope3").instance
    with pytest.raises(PreconditionError):
        sweep(ell)
    with pytest.raises(PreconditionError):
        sweep(ell, nodes=[])


def test_point_diagnostics_defaults():
    d = PointDiagnostics(eps=0.0)
    assert d.sizes == (0, 0, 0) and not d.nonsingular


def test_sweep_into_unbounded_region():
    # X11 = 1 with objective (1 - eps) X22: the primal is unbounded for eps > 1
    inst = ParametricInstance(np.array([np.diag([1.0, 0.0])]), [1.0], np.diag([0.0, 1.0]), np.diag([0.0, -1.0]))
    d = classify_many(inst, [1.5])[0]
    assert not d.determined and d.message.startswith("dual objective unbounded suspected")
    classes, _ = sweep(inst, (0.0, 2.0), 0.5)
    assert classes[0].kind == INVARIANCY and classes[0].boundaries[0] == -math.inf
    assert abs(classes[0].boundaries[1] - 1.0) <= 1e-6
    assert [c.kind for c in classes[1:]] == [UNDETERMINED] * 3
    assert any("unbounded suspected" in line for line in sweep_summary(classes))
