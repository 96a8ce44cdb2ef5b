"""Bundled test instances with closed-form expectations.

``elliptope3`` is the 3x3 elliptope problem with objective
``C + eps*Cbar``; the others append one redundant constraint through a
slack entry in a fourth row and column.  Expected partitions and optimal
solutions are stored as functions of ``eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import ParametricInstance

C3 = np.array([[0.0, -1.0, 1.0], [-1.0, 0.0, -1.0], [1.0, -1.0, 0.0]])
CBAR3 = np.array([[0.0, 2.0, -2.0], [2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]])

TRANSITIONS = (-0.5, 1.5)


def _unit(i, j, n):
    M = np.zeros((n, n))
    M[i, j] = M[j, i] = 1.0
    return M


def _col(*xs):
    v = np.array(xs, dtype=float).reshape(-1, 1)
    return v / np.linalg.norm(v)


def _empty(n):
    return np.zeros((n, 0))


def elliptope_X(eps: float) -> np.ndarray:
    """Unique (or, at ``eps = 1/2``, analytic-center) primal optimum."""
    if eps <= -0.5:
        v = np.array([1.0, 1.0, -1.0])
        return np.outer(v, v)
    if eps >= 1.5:
        v = np.array([1.0, -1.0, 1.0])
        return np.outer(v, v)
    x = 0.5 - eps
    y = eps - 0.5
    z = 1.0 - 2.0 * (eps - 0.5) ** 2
    return np.array([[1.0, x, y], [x, 1.0, z], [y, z, 1.0]])


def elliptope_S(eps: float) -> np.ndarray:
    """Unique dual optimal slack."""
    if eps <= -0.5:
        return np.array(
            [[2 - 4 * eps, 2 * eps - 1, 1 - 2 * eps], [2 * eps - 1, -2 * eps, -1.0], [1 - 2 * eps, -1.0, -2 * eps]]
        )
    if eps >= 1.5:
        return np.array(
            [[4 * eps - 2, 2 * eps - 1, 1 - 2 * eps], [2 * eps - 1, 2 * eps - 2, -1.0], [1 - 2 * eps, -1.0, 2 * eps - 2]]
        )
    a = 2 * eps - 1
    return np.array([[a * a, a, -a], [a, 1.0, -1.0], [-a, -1.0, 1.0]])


def elliptope_y(eps: float) -> np.ndarray:
    return -np.diag(elliptope_S(eps)) + np.diag(C3 + eps * CBAR3)


def elliptope_partition(eps: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal bases of ``(B, T, N)``."""
    if eps < -0.5:
        return _col(-1, -1, 1), _empty(3), np.hstack([_col(0, 1, 1), _col(2, -1, 1)])
    if eps == -0.5:
        return _col(-1, -1, 1), _col(0, 1, 1), _col(2, -1, 1)
    if eps == 1.5:
        return _col(1, -1, 1), _col(0, 1, 1), _col(-2, -1, 1)
    if eps > 1.5:
        return _col(1, -1, 1), _empty(3), np.hstack([_col(0, 1, 1), _col(-2, -1, 1)])
    a = 2 * eps - 1
    nu1 = math.sqrt(2 * a * a + 4)
    nu2 = math.sqrt(a * a + 2)
    b1 = np.array([[0.0], [1 / math.sqrt(2)], [1 / math.sqrt(2)]])
    if a == 0:
        b2 = np.array([[1.0], [0.0], [0.0]])
    else:
        b2 = np.array([[2 * math.copysign(1.0, a) / nu1], [-abs(a) / nu1], [abs(a) / nu1]])
    N = np.array([[(1 - 2 * eps) / nu2], [-1 / nu2], [1 / nu2]])
    return np.hstack([b1, b2]), _empty(3), N


def elliptope_eigenvalues(eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the optimal ``X`` and ``S`` on the nonlinearity interval."""
    lx = np.array([-2 * eps**2 + 2 * eps + 1.5, 2 * eps**2 - 2 * eps + 1.5, 0.0])
    ls = np.array([4 * eps**2 - 4 * eps + 3, 0.0, 0.0])
    return -np.sort(-lx), ls


def elliptope_instance(Cbar=CBAR3, name="elliptope3") -> ParametricInstance:
    A = np.array([_unit(i, i, 3) for i in range(3)])
    return ParametricInstance(A, np.ones(3), C3, Cbar, name=name)


def _embed(M3):
    M = np.zeros((4, 4))
    M[:3, :3] = M3
    return M


def z_slack_instance() -> ParametricInstance:
    """Elliptope with ``X23 <= 1`` written as ``X23 + X44 = 1``."""
    A = [_unit(i, i, 4) for i in range(3)]
    A.append(0.5 * _unit(1, 2, 4) + _unit(3, 3, 4))
    A += [0.5 * _unit(i, 3, 4) for i in range(3)]
    b = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
    return ParametricInstance(np.array(A), b, _embed(C3), _embed(CBAR3), name="elliptope3-z-slack")


def redundant_row_instance() -> ParametricInstance:
    """Elliptope with ``X12 + X13 <= 2`` written as ``X12 + X13 + X44 = 2``."""
    A = [_unit(i, i, 4) for i in range(3)]
    A.append(0.5 * _unit(0, 1, 4) + 0.5 * _unit(0, 2, 4) + _unit(3, 3, 4))
    A += [0.5 * _unit(i, 3, 4) for i in range(3)]
    b = [1.0, 1.0, 1.0, 2.0, 0.0, 0.0, 0.0]
    return ParametricInstance(
        np.array(A), b, _embed(C3), _embed(CBAR3), name="elliptope3-redundant-row"
    )


def redundant_row_X(eps: float) -> np.ndarray:
    """Analytic center of the primal optimal set of the redundant-row instance."""
    if eps == 0.5:
        x = -1.0 / 3.0
        X = np.zeros((4, 4))
        X[:3, :3] = [[1.0, x, x], [x, 1.0, 1.0], [x, 1.0, 1.0]]
        X[3, 3] = 2.0 - 2.0 * x
        return X
    X3 = elliptope_X(eps)
    X = _embed(X3)
    X[3, 3] = 2.0 - X3[0, 1] - X3[0, 2]
    return X


@dataclass(frozen=True)
class Fixture:
    name: str
    instance: ParametricInstance
    known: dict = field(default_factory=dict)

    def partition(self, eps: float):
        f: Callable | None = self.known.get("partition")
        return None if f is None else f(eps)


def _elliptope():
    return Fixture(
        "elliptope3",
        elliptope_instance(),
        {
            "X": elliptope_X,
            "S": elliptope_S,
            "y": elliptope_y,
            "partition": elliptope_partition,
            "eigenvalues": elliptope_eigenvalues,
            "transitions": TRANSITIONS,
            "invariancy": ((-math.inf, -0.5), (1.5, math.inf)),
            "nonlinearity": ((-0.5, 1.5),),
            "dual_degenerate": (0.5,),
        },
    )


def _z_slack():
    return Fixture("elliptope3-z-slack", z_slack_instance(), {"transitions": (0.5,)})


def _redundant_row():
    return Fixture(
        "elliptope3-redundant-row",
        redundant_row_instance(),
        {"X": redundant_row_X, "center_half": (-1.0 / 3.0, 8.0 / 3.0), "limit_half": (0.0, 2.0)},
    )


def _constant():
    return Fixture(
        "elliptope3-constant",
        elliptope_instance(Cbar=np.zeros((3, 3)), name="elliptope3-constant"),
        {"transitions": ()},
    )


FIXTURES = {
    "elliptope3": _elliptope,
    "elliptope3-z-slack": _z_slack,
    "elliptope3-redundant-row": _redundant_row,
    "elliptope3-constant": _constant,
}


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture '{name}'; choose from {', '.join(FIXTURES)}") from None
