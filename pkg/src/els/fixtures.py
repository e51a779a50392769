"""Built-in instance catalogue.

Small named instances used throughout the tests and handy for CLI
experiments: the tight/inexact relaxation witnesses (example-4.x), the
certificate examples (example-5.x), and parameterized families for
partitioning, binary LPs, assignment and maximin dispersion.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import UnknownFixture
from .linalg import as_matrix
from .problem import ElsProblem, LinearConstraint, MinimaxPiece, MinimaxProblem

FIXTURE_NAMES = (
    "example-4.1",
    "example-4.2",
    "example-4.3",
    "example-5.1",
    "example-5.2",
    "partition",
    "binary-lp",
    "assignment",
    "dispersion",
)


def _unit_entry(p: int, n: int, row: int, col: int) -> np.ndarray:
    A = np.zeros((p, n))
    A[row, col] = 1.0
    return A


def _example_4_1() -> ElsProblem:
    # p=1, n=2, k=2: minimize -x1 - x2 with x1 <= 0, x2 <= 0 on the circle.
    return ElsProblem(
        n=2,
        p=1,
        A0=np.array([[-1.0, -1.0]]),
        constraints=[
            LinearConstraint(A=np.array([[1.0, 0.0]]), upper=0.0),
            LinearConstraint(A=np.array([[0.0, 1.0]]), upper=0.0),
        ],
    )


def _example_4_2() -> ElsProblem:
    # p=2, n=3, k=2: minimize X[2,1] with X[0,0] = X[1,0] = 0.
    A0 = _unit_entry(2, 3, 1, 2)  # tr(A0 @ X) = X[2,1]
    c1 = _unit_entry(2, 3, 0, 0)  # tr = X[0,0]
    c2 = _unit_entry(2, 3, 0, 1)  # tr = X[1,0]
    return ElsProblem(
        n=3,
        p=2,
        A0=A0,
        constraints=[
            LinearConstraint(A=c1, lower=0.0, upper=0.0),
            LinearConstraint(A=c2, lower=0.0, upper=0.0),
        ],
    )


def _example_4_3() -> ElsProblem:
    # p=3, n=3, k=1: minimize X[1,1] + X[2,2] with X[0,0] = 0.
    return ElsProblem(
        n=3,
        p=3,
        A0=np.diag([0.0, 1.0, 1.0]),
        constraints=[LinearConstraint(A=np.diag([1.0, 0.0, 0.0]), lower=0.0, upper=0.0)],
    )


def _example_5_1() -> ElsProblem:
    # p=1, n=2, k=1: minimize -x1 - 2 x2 with x1 <= 0 on the circle; the
    # point (0, 1) is the global minimizer, (0, -1) a local non-global one.
    return ElsProblem(
        n=2,
        p=1,
        A0=np.array([[-1.0, -2.0]]),
        constraints=[LinearConstraint(A=np.array([[1.0, 0.0]]), upper=0.0)],
    )


def _example_5_2() -> ElsProblem:
    # p=2, n=4, k=1: feasibility instance whose constraint Jacobian changes
    # rank over the feasible set.
    A = np.array([[1.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]])
    return ElsProblem(
        n=4,
        p=2,
        A0=np.zeros((2, 4)),
        constraints=[LinearConstraint(A=A, lower=1.0, upper=1.0)],
    )


def _partition(a) -> ElsProblem:
    # Sign-vector partition feasibility as a sphere instance with k = n + 1
    # constraints: a.T @ X >= 0 and |X_i| <= 1/sqrt(n).
    a = np.asarray(a, dtype=float).ravel()
    n = a.size
    bound = 1.0 / math.sqrt(n)
    constraints = [LinearConstraint(A=a.reshape(1, n), lower=0.0)]
    for i in range(n):
        constraints.append(
            LinearConstraint(A=_unit_entry(1, n, 0, i), lower=-bound, upper=bound)
        )
    return ElsProblem(n=n, p=1, A0=a.reshape(1, n), constraints=constraints)


def _binary_lp(A, a, b) -> ElsProblem:
    # Binary LP min{a.T y : A y <= b, y in {-1,1}^n} rescaled to the sphere
    # via y = sqrt(n) X.
    A = as_matrix(A, "A")
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if a.size != n or b.size != m:
        raise UnknownFixture("binary-lp parameters have inconsistent shapes")
    root = math.sqrt(n)
    constraints = [
        LinearConstraint(A=root * A[j].reshape(1, n), upper=float(b[j])) for j in range(m)
    ]
    bound = 1.0 / root
    for i in range(n):
        constraints.append(
            LinearConstraint(A=_unit_entry(1, n, 0, i), lower=-bound, upper=bound)
        )
    return ElsProblem(n=n, p=1, A0=root * a.reshape(1, n), constraints=constraints)


def _assignment(A0) -> ElsProblem:
    # Linear sum assignment: p = n with n^2 entrywise nonnegativity
    # constraints; orthogonal + nonnegative forces a permutation matrix.
    A0 = as_matrix(A0, "A0")
    n = A0.shape[0]
    if A0.shape != (n, n):
        raise UnknownFixture("assignment objective must be square")
    constraints = [
        LinearConstraint(A=_unit_entry(n, n, j, i), lower=0.0)
        for i in range(n)
        for j in range(n)
    ]
    return ElsProblem(n=n, p=n, A0=A0, constraints=constraints)


def _dispersion(w, d) -> MinimaxProblem:
    # Sphere-constrained weighted maximin dispersion; each squared distance
    # is affine on the sphere, so the problem is a pointwise-max instance.
    # The minimax value equals minus the dispersion value.
    w = np.asarray(w, dtype=float).ravel()
    d = as_matrix(d, "anchors")  # m x n
    m, n = d.shape
    if w.size != m:
        raise UnknownFixture("dispersion weights and anchors disagree")
    pieces = [
        MinimaxPiece(A=2.0 * w[i] * d[i].reshape(1, n), c=-w[i] * (1.0 + float(d[i] @ d[i])))
        for i in range(m)
    ]
    base = ElsProblem(n=n, p=1, A0=np.zeros((1, n)))
    return MinimaxProblem(base=base, pieces=pieces)


def build_fixture(name: str, **params):
    """Return the named instance; raises UnknownFixture for anything else.

    ``dispersion`` returns a MinimaxProblem (its objective is a pointwise
    maximum); every other name returns an ElsProblem.
    """
    if name == "example-4.1":
        return _example_4_1()
    if name == "example-4.2":
        return _example_4_2()
    if name == "example-4.3":
        return _example_4_3()
    if name == "example-5.1":
        return _example_5_1()
    if name == "example-5.2":
        return _example_5_2()
    if name == "partition":
        return _partition(**params)
    if name == "binary-lp":
        return _binary_lp(**params)
    if name == "assignment":
        return _assignment(**params)
    if name == "dispersion":
        return _dispersion(**params)
    raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
