import json
import math

import numpy as np
import pytest

from parasdo.centralpath import central_residual
from parasdo.errors import DimensionError, ValidationError
from parasdo.fixtures import C3, CBAR3, elliptope_instance, elliptope_S, elliptope_X, elliptope_y, z_slack_instance
from parasdo.model import (
    ParametricInstance,
    PrimalDualPoint,
    find_strictly_feasible,
    load_instance,
    residuals,
    save_instance,
    validate_instance,
)


def test_validate_example_instance(ell):
    rep = validate_instance(ell)
    assert (rep.n, rep.m, rep.rank, rep.ok) == (3, 3, 3, True)


def test_validate_duplicated_constraint():
    A = np.array([np.diag([1.0, 0, 0]), np.diag([1.0, 0, 0]), np.diag([0, 0, 1.0])])
    inst = ParametricInstance(A, [1, 1, 1], C3, CBAR3)
    rep = validate_instance(inst)
    assert rep.rank == 2 and not rep.ok
    with pytest.raises(ValidationError):
        validate_instance(inst, raise_on_failure=True)


def test_validate_z_slack_instance():
    inst = z_slack_instance()
    # oracle: rank of the explicit constraint matrix by QR
    R = np.linalg.qr(inst.Amat.T, mode="r")
    assert np.sum(np.abs(np.diag(R)) > 1e-10) == inst.m == 7
    assert validate_instance(inst).ok


def test_instance_rejects_bad_shapes():
    with pytest.raises(DimensionError):
        ParametricInstance(np.zeros((1, 2, 2)), [1.0, 2.0], np.eye(2), np.eye(2))
    with pytest.raises(DimensionError):
        ParametricInstance(np.zeros((1, 3, 3)), [1.0], np.eye(2), np.eye(2))
    with pytest.raises(DimensionError):
        ParametricInstance(np.zeros((1, 2, 2)), [1.0], np.eye(2), np.eye(3))


def test_strictly_feasible_identity_and_shift(ell):
    X0 = np.eye(3)
    assert residuals(ell, 0.0, PrimalDualPoint(X0, np.zeros(3), np.eye(3))).primal_res == 0.0
    y0 = -3.0 * np.ones(3)
    S0 = C3 - np.diag(y0)
    assert np.linalg.eigvalsh(S0)[0] > 0  # C + 3I is positive definite
    assert residuals(ell, 0.0, PrimalDualPoint(X0, y0, S0)).dual_res <= 1e-15


@pytest.mark.parametrize("make,eps", [(elliptope_instance, 0.0), (z_slack_instance, 0.5), (elliptope_instance, 7.0)])
def test_find_strictly_feasible(make, eps):
    inst = make()
    p = find_strictly_feasible(inst, eps)
    r = residuals(inst, eps, p)
    assert r.primal_res <= 1e-8 and r.dual_res <= 1e-8
    assert r.min_eig_X >= 1e-6 and r.min_eig_S >= 1e-6


def test_residuals_zero_point(ell):
    r = residuals(ell, 0.0, PrimalDualPoint(np.zeros((3, 3)), np.zeros(3), np.zeros((3, 3))))
    assert math.isclose(r.primal_res, math.sqrt(3))


def test_residuals_at_closed_form_optimum(ell):
    for eps in (0.0, 0.3, -1.0, 2.0):
        p = PrimalDualPoint(elliptope_X(eps), elliptope_y(eps), elliptope_S(eps))
        r = residuals(ell, eps, p)
        assert r.primal_res <= 1e-14 and r.dual_res <= 1e-14
        assert abs(r.gap) <= 1e-12
        assert r.min_eig_X >= -1e-12 and r.min_eig_S >= -1e-12


def test_residuals_interpolate_linearly(ell):
    rng = np.random.default_rng(2)

    def rand_point():
        G, H = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
        return PrimalDualPoint(G + G.T, rng.standard_normal(3), H + H.T)

    p, q = rand_point(), rand_point()
    rho = 0.3
    mix = PrimalDualPoint(rho * p.X + (1 - rho) * q.X, rho * p.y + (1 - rho) * q.y, rho * p.S + (1 - rho) * q.S)
    # the constraint residual vectors are affine in the point
    m, N = ell.m, ell.N
    Fp, Fq, Fm = (central_residual(ell, 0.4, 1.0, z)[: m + N] for z in (p, q, mix))
    assert np.abs(Fm - (rho * Fp + (1 - rho) * Fq)).max() <= 1e-12


def test_residuals_dimension_mismatch(ell):
    with pytest.raises(DimensionError):
        residuals(ell, 0.0, PrimalDualPoint(np.eye(2), np.zeros(3), np.eye(2)))


def test_save_load_round_trip(tmp_path, ell):
    path = tmp_path / "inst.json"
    save_instance(ell, path)
    back = load_instance(path)
    for a, b in ((back.A, ell.A), (back.b, ell.b), (back.C, ell.C), (back.Cbar, ell.Cbar)):
        assert np.array_equal(a, b)
    assert back.name == "inst"


def test_load_reports_json_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "n": 2,\n  "m": 1,,\n}\n')
    with pytest.raises(ValidationError, match=r"line 3 column"):
        load_instance(path)


def test_load_non_square_matrix(tmp_path, ell):
    data = ell.to_dict()
    data["C"] = [[0.0, 1.0, 2.0], [1.0, 0.0]]
    path = tmp_path / "nonsquare.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError, match="'C'"):
        load_instance(path)


def test_load_missing_field_and_count(tmp_path, ell):
    data = ell.to_dict()
    del data["Cbar"]
    path = tmp_path / "missing.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError, match="Cbar"):
        load_instance(path)
    data = ell.to_dict()
    data["m"] = 2
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError, match="expected m = 2"):
        load_instance(path)


def test_loader_symmetrizes_and_rejects_asymmetry(tmp_path, ell):
    data = ell.to_dict()
    data["C"][0][1] += 1e-12
    path = tmp_path / "nearly.json"
    path.write_text(json.dumps(data))
    inst = load_instance(path)
    assert np.array_equal(inst.C, inst.C.T)
    data["C"][0][1] += 1.0
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError):
        load_instance(path)
