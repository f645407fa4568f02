"""Compiled-in test problems: a Riccati system with two additive noises,
the matching two- and three-Wiener linear systems, and the weight matrices
of the order-1 local error comparison.
"""
from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from .integrators import LinearSDESystem, RiccatiProblem, riccati_linearize

__all__ = ["D0", "D1", "D2", "A0", "C0", "A3", "riccati_problem", "riccati_system",
           "linear_2w", "linear_3w", "FIXTURES", "get_fixture", "b_matrix", "c_matrix",
           "b_cubic"]

D0 = np.array([[0.5, 0.5], [0.0, 1.0]])
D1 = np.array([[0.0, 1.0], [-0.5, -51 / 200]])
D2 = np.array([[1.0, 1.0], [1.0, 0.5]])
A0 = np.array([[-1.0, 1.0], [-0.5, -1.0]])
C0 = np.array([[-0.5, 0.0], [-1.0, -1.0]])
A3 = np.array([[1 / 4, 2 / 5], [1 / 6, 1 / 7]])

for _m in (D0, D1, D2, A0, C0, A3):
    _m.setflags(write=False)


def riccati_problem() -> RiccatiProblem:
    z = np.zeros((2, 2))
    return RiccatiProblem(A=(A0, z, z), B=(z, z, z), C=(C0, z, z), D=(D0, D1, D2),
                          u0=np.eye(2))


def riccati_system() -> LinearSDESystem:
    r = riccati_problem()
    return riccati_linearize(r.A, r.B, r.C, r.D)


def linear_2w():
    """Two-Wiener linear system ``a_i = D_i`` with ``y_0 = (1/2, 1)``."""
    return LinearSDESystem([D0, D1, D2]), np.array([0.5, 1.0])


def linear_3w():
    return LinearSDESystem([D0, D1, D2, A3]), np.array([0.5, 1.0])


def _riccati():
    # U and V stacked: y_0 = [I; I]
    return riccati_system(), np.vstack([np.eye(2), np.eye(2)])


FIXTURES = {
    "riccati-9.1": _riccati,
    "linear-2w": linear_2w,
    "linear-3w": linear_3w,
}


def get_fixture(name):
    """``(system, y0)`` for a fixture id."""
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None


_B = [[31, 10, 1, 18, 12, 24],
      [10, 4, 10, 0, 0, 0],
      [1, 10, 31, 18, 24, 12],
      [18, 0, 18, 60, 36, 36],
      [12, 0, 24, 36, 36, 36],
      [24, 0, 12, 36, 36, 36]]
_C = [[4, 1, 1, 1, 1, -2],
      [1, 4, 1, -2, 1, 1],
      [1, 1, 4, 1, -2, 1],
      [1, -2, 1, 4, 1, 1],
      [1, 1, -2, 1, 4, 1],
      [-2, 1, 1, 1, 1, 4]]


def b_matrix(exact=False):
    """Weights of the ``U_iij`` blocks in the order-1 mean-square remainder gap."""
    if exact:
        return [[F(v, 144) for v in row] for row in _B]
    return np.array(_B, dtype=float) / 144


def c_matrix(exact=False):
    """Weights of the ``U_ijk`` blocks (three distinct indices)."""
    if exact:
        return [[F(v, 36) for v in row] for row in _C]
    return np.array(_C, dtype=float) / 36


def b_cubic():
    """Integer coefficients of the cubic whose roots are the three irrational
    eigenvalues of ``b`` not given in closed form (highest degree first)."""
    return (288, -288, 14, 1)
