import numpy as np
import pytest

from parasdo.fixtures import (
    FIXTURES,
    elliptope_eigenvalues,
    elliptope_partition,
    elliptope_S,
    elliptope_X,
    get_fixture,
    redundant_row_X,
)
from parasdo.model import validate_instance
from parasdo.symlin import complete_basis, svec

SAMPLES = [-0.45, -0.2, 0.0, 0.1, 0.3, 0.49, 0.51, 0.8, 1.0, 1.3, 1.45]


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_instances_validate(name):
    assert validate_instance(get_fixture(name).instance).ok


def test_unknown_fixture():
    with pytest.raises(KeyError, match="unknown fixture"):
        get_fixture("nope")


@pytest.mark.parametrize("eps", SAMPLES)
def test_partition_columns_are_unit_vectors(eps):
    B, T, N = elliptope_partition(eps)
    Q = np.hstack([B, T, N])
    assert np.abs(np.linalg.norm(Q, axis=0) - 1).max() <= 1e-12
    assert np.allclose(Q.T @ Q, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("eps", SAMPLES + [-1.0, -0.5, 0.5, 1.5, 2.0])
def test_closed_forms_are_optimal(ell, eps):
    X, S = elliptope_X(eps), elliptope_S(eps)
    assert np.allclose(np.diag(X), 1.0)
    assert np.linalg.eigvalsh(X)[0] >= -1e-12
    assert np.linalg.eigvalsh(S)[0] >= -1e-12
    assert np.abs(X @ S).max() <= 1e-12
    # S - C(eps) is diagonal, so the dual constraint holds with y = diag
    D = ell.objective(eps) - S
    assert np.abs(D - np.diag(np.diag(D))).max() <= 1e-12


@pytest.mark.parametrize("eps", SAMPLES + [-1.0, -0.5, 1.5, 2.0])
def test_partition_matches_closed_forms(eps):
    B, T, N = elliptope_partition(eps)
    X, S = elliptope_X(eps), elliptope_S(eps)
    # X lives on B and S on N
    TN = np.hstack([T, N])
    assert np.abs(TN.T @ X).max() <= 1e-12
    BT = np.hstack([B, T])
    assert np.abs(BT.T @ S).max() <= 1e-12
    assert np.linalg.matrix_rank(X, tol=1e-9) == B.shape[1]
    assert np.linalg.matrix_rank(S, tol=1e-9) == N.shape[1]


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.2])
def test_eigenvalue_formulas(eps):
    lx, ls = elliptope_eigenvalues(eps)
    assert np.allclose(np.sort(np.linalg.eigvalsh(elliptope_X(eps))), np.sort(lx), atol=1e-12)
    assert np.allclose(np.sort(np.linalg.eigvalsh(elliptope_S(eps))), np.sort(ls), atol=1e-12)


def test_partition_complements():
    B, _, N = elliptope_partition(0.0)
    assert np.allclose(complete_basis(N) @ complete_basis(N).T, B @ B.T, atol=1e-12)


def test_redundant_row_closed_forms():
    inst = get_fixture("elliptope3-redundant-row").instance
    for eps in (0.5, 0.49, 0.6):
        X = redundant_row_X(eps)
        assert np.abs(inst.Amat @ svec(X) - inst.b).max() <= 1e-12
        assert np.linalg.eigvalsh(X)[0] >= -1e-12
    X = redundant_row_X(0.5)
    assert np.isclose(X[0, 1], -1 / 3) and np.isclose(X[3, 3], 8 / 3)
