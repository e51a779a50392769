"""Rank reduction of optimal lifted solutions.

A lifted optimum Y of rank n + s (s >= 1) is moved along directions
U @ D @ U.T that keep both identity diagonal blocks and every constraint
trace fixed, with a step length that makes I + eps*D singular PSD.  Each
step drops the rank by at least one while preserving feasibility exactly and
the objective up to the solver's optimality gap; after at most s steps the
off-diagonal block has orthonormal columns.  A nonzero direction always
exists when p <= n - k; outside that regime the search can come up empty,
which is reported as possible inexactness of the relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .lift import LiftedConstraintSet, LiftedSolution
from .linalg import DEFAULT_TOL, nullspace_basis, sym_eig, symmetric_basis
from .problem import residuals


@dataclass
class ReductionState:
    """Factored form Y = U @ U.T with U = [[I_n, 0], [X.T, C]].

    C is a p x s full-column-rank factor with C @ C.T = I_p - X.T @ X; the
    rank excess s equals rank(Y) - n.
    """

    Y: np.ndarray
    X: np.ndarray
    C: np.ndarray
    U: np.ndarray
    s: int


@dataclass
class Direction:
    """Unit-Frobenius symmetric direction with its singularizing step."""

    D: np.ndarray
    epsilon: float


@dataclass
class ReductionStep:
    """One trace entry: state after an iteration."""

    rank: int
    objective: float
    max_drift: float  # largest constraint-trace drift from the initial Y

    def as_dict(self) -> dict:
        return {"rank": self.rank, "objective": self.objective, "max_drift": self.max_drift}


@dataclass
class InexactnessReport:
    """Raised rank reduction could not reach rank n.

    Only possible outside the p <= n - k guarantee; signals that the
    relaxation may be inexact for this instance.
    """

    reason: str
    trace: list[ReductionStep] = field(default_factory=list)
    state: ReductionState | None = None


def factor_state(Y: LiftedSolution, rank_tol: float = DEFAULT_TOL) -> ReductionState:
    """Factor a PSD lifted matrix into the U-form above.

    C keeps the eigenpairs of I_p - X.T @ X above ``rank_tol`` (relative to
    max(1, largest eigenvalue)), columns scaled by sqrt(eigenvalue).
    """
    n, p = Y.n, Y.p
    min_eig = float(np.linalg.eigvalsh(Y.Y).min()) if Y.Y.size else 0.0
    if min_eig < -1e-8 * (1.0 + np.linalg.norm(Y.Y)):
        raise InvalidInput(f"lifted matrix is not PSD within tolerance (min eig {min_eig:.3e})")
    X = Y.Y[:n, n:].copy()
    gap = np.eye(p) - X.T @ X
    eig = sym_eig(gap)
    thresh = rank_tol * max(1.0, float(eig.eigenvalues.max()) if p else 1.0)
    keep = eig.eigenvalues > thresh
    s = int(keep.sum())
    C = eig.eigenvectors[:, keep] * np.sqrt(eig.eigenvalues[keep])
    U = np.zeros((n + p, n + s))
    U[:n, :n] = np.eye(n)
    U[n:, :n] = X.T
    U[n:, n:] = C
    return ReductionState(Y=Y.Y, X=X, C=C, U=U, s=s)


def _direction_rows(state: ReductionState, lifted: LiftedConstraintSet):
    """Rows of the linear system for D over the symmetric-matrix basis.

    The unknown D is symmetric of order n + s; the rows force (in order)
    the leading n x n block of D to vanish, the trailing p x p block of
    U @ D @ U.T to vanish, and every constraint trace of U @ D @ U.T to
    vanish.  Returns (rows, objective_row, basis).
    """
    n, p, s = lifted.n, lifted.p, state.s
    m = n + s
    basis = symmetric_basis(m)
    T = np.hstack([state.X.T, state.C])  # p x (n+s), the bottom block of U

    rows = []
    # Leading block of D itself (U picks it out unchanged).
    for i in range(n):
        for j in range(i, n):
            rows.append([S[i, j] for S in basis])
    # Trailing p x p block of U D U.T.
    TS = [T @ S @ T.T for S in basis]
    for i in range(p):
        for j in range(i, p):
            rows.append([W[i, j] for W in TS])
    # Constraint traces tr(B_i U D U.T) = tr((U.T B_i U) D).
    for B in lifted.B[1:]:
        G = state.U.T @ B @ state.U
        G = 0.5 * (G + G.T)
        rows.append([float(np.sum(G * S)) for S in basis])
    G0 = state.U.T @ lifted.B[0] @ state.U
    G0 = 0.5 * (G0 + G0.T)
    obj_row = np.array([float(np.sum(G0 * S)) for S in basis])
    return np.array(rows), obj_row, basis


def find_direction(
    state: ReductionState,
    lifted: LiftedConstraintSet,
    tol: float = DEFAULT_TOL,
) -> Direction | None:
    """A unit direction in the null space of the trace-preserving system.

    Returns None only when that null space is empty, which cannot happen
    when p <= n - k.  Among valid directions, one that also annihilates the
    objective trace is preferred when available (it exists whenever the
    null space has dimension >= 2, and keeps the objective drift at rounding
    level); otherwise the first null-space basis column is used.
    """
    if state.s < 1:
        raise InvalidInput("find_direction requires rank excess s >= 1")
    rows, obj_row, basis = _direction_rows(state, lifted)
    null = nullspace_basis(rows, tol)
    if null.shape[1] == 0:
        return None
    extended = nullspace_basis(np.vstack([rows, obj_row]), tol)
    coeffs = extended[:, 0] if extended.shape[1] else null[:, 0]
    D = sum(c * S for c, S in zip(coeffs, basis))
    D = 0.5 * (D + D.T)
    D /= np.linalg.norm(D)
    eigvals = np.linalg.eigvalsh(D)
    lam = eigvals[np.argmax(np.abs(eigvals))]
    return Direction(D=D, epsilon=-1.0 / lam)


def reduce_to_stiefel(
    Y: LiftedSolution,
    lifted: LiftedConstraintSet,
    rank_tol: float = DEFAULT_TOL,
):
    """Purify an optimal lifted solution down to rank n.

    Returns (StiefelPoint, trace) on success, or an InexactnessReport when
    no direction exists or the iteration fails to terminate within p steps
    (both only possible when p > n - k).
    """
    targets = lifted.trace_values(Y.Y)  # frozen at the input, index 0 = objective
    state = factor_state(Y, rank_tol)
    trace = [ReductionStep(rank=lifted.n + state.s, objective=float(targets[0]), max_drift=0.0)]

    for _ in range(lifted.p):
        if state.s == 0:
            break
        direction = find_direction(state, lifted)
        if direction is None:
            return InexactnessReport(
                reason="no trace-preserving direction exists at rank excess "
                f"s={state.s}; the relaxation may be inexact",
                trace=trace,
                state=state,
            )
        m = state.U.shape[1]
        Y_next = state.U @ (np.eye(m) + direction.epsilon * direction.D) @ state.U.T
        Y_next = 0.5 * (Y_next + Y_next.T)

        values = lifted.trace_values(Y_next)
        drift = float(np.abs(values[1:] - targets[1:]).max()) if lifted.k else 0.0
        new_sol = LiftedSolution(Y=Y_next, n=lifted.n, p=lifted.p, rank=0)
        new_state = factor_state(new_sol, rank_tol)
        if new_state.s >= state.s:
            return InexactnessReport(
                reason=f"rank excess stalled at s={state.s}",
                trace=trace,
                state=state,
            )
        state = new_state
        trace.append(
            ReductionStep(rank=lifted.n + state.s, objective=float(values[0]), max_drift=drift)
        )

    if state.s != 0:
        return InexactnessReport(
            reason=f"rank excess s={state.s} remains after {lifted.p} steps",
            trace=trace,
            state=state,
        )
    point = residuals(lifted.problem, state.X)
    return point, trace
