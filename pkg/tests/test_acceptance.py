"""Acceptance suite: one test per release criterion.

Each test prints one [acceptance] PASS/FAIL line (visible with -s or in the
captured output).  Random instances are seeded, so the suite is
deterministic; stated runtime budgets are asserted where the criterion pins
one.
"""

import functools
import time

import numpy as np
import pytest

from els.certificate import active_set, certify_global, fit_multipliers, licq_check
from els.fixtures import build_fixture
from els.lift import lift_constraints, lift_point
from els.linalg import random_stiefel, thin_svd
from els.minimax import solve_minimax, solve_minimax_epigraph
from els.oracle import assignment_oracle, minimax_oracle, oracle_solve
from els.problem import ElsProblem, LinearConstraint, MinimaxPiece, MinimaxProblem, residuals
from els.reduction import InexactnessReport, reduce_to_stiefel
from els.solver import SolverConfig, solve_cr, solve_ls_svd
from tests.test_solver import random_feasible_problem

TIGHT = SolverConfig(tol=1e-10)

# Reduction traces produced by the pipeline criteria, validated by the
# trace-invariant criterion below.
_TRACES: list[tuple[int, int, list]] = []  # (n, p, trace)


def criterion(num, summary):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\n[acceptance] criterion {num:2d} FAIL: {summary}")
                raise
            print(f"\n[acceptance] criterion {num:2d} PASS: {summary}")
        return wrapper
    return deco


def _pipeline(prob, rank_tol=1e-8):
    sol = solve_cr(prob, TIGHT)
    assert sol.status == "optimal"
    lifted = lift_constraints(prob)
    outcome = reduce_to_stiefel(lift_point(sol.X, lifted), lifted, rank_tol)
    return sol, outcome


def _oracle_with_retry(prob, target, tol, seed):
    """Search oracle with escalating effort when it misses the target."""
    value, point = oracle_solve(prob, restarts=30, seed=seed)
    if abs(value - target) > tol:
        value, point = oracle_solve(prob, restarts=200, seed=seed + 1000)
    return value, point


@criterion(1, "two-sign-constraint circle instance: relaxation 0, oracle 1, inexact")
def test_criterion_01_circle_gap_instance():
    start = time.perf_counter()
    prob = build_fixture("example-4.1")
    sol, outcome = _pipeline(prob)
    assert abs(sol.value - 0.0) <= 1e-6
    value, _ = oracle_solve(prob, restarts=8, seed=0)
    assert abs(value - 1.0) <= 1e-6
    assert isinstance(outcome, InexactnessReport)  # the report flags inexactness
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"runtime {elapsed:.2f}s exceeds 1s"


@criterion(2, "forced-zero-entry instance: relaxation -1, oracle 0")
def test_criterion_02_forced_zero_gap_instance():
    prob = build_fixture("example-4.2")
    sol = solve_cr(prob, TIGHT)
    assert abs(sol.value - (-1.0)) <= 1e-6
    # brute-force confirmation over the free entries of the relaxed set:
    # X = [[0, a], [0, b], [c, d]] with Gram matrix dominated by the identity
    grid = np.linspace(-1.0, 1.0, 41)
    a, b, c, d = np.meshgrid(grid, grid, grid, grid, indexing="ij")
    t11, t22, t12 = 1.0 - c**2, 1.0 - (a**2 + b**2 + d**2), -(c * d)
    feasible = (t11 >= 0) & (t22 >= 0) & (t11 * t22 - t12**2 >= 0)
    assert float(d[feasible].min()) == pytest.approx(-1.0, abs=1e-9)
    value, _ = oracle_solve(prob, restarts=8, seed=0)
    assert abs(value - 0.0) <= 1e-6


@criterion(3, "diagonal-objective gap instance: relaxation -2, oracle -1, inexact")
def test_criterion_03_diagonal_gap_instance():
    prob = build_fixture("example-4.3")
    sol, outcome = _pipeline(prob)
    assert abs(sol.value - (-2.0)) <= 1e-6
    recovered_infeasible = (
        not isinstance(outcome, InexactnessReport) and not outcome[0].feasible(1e-6)
    )
    assert isinstance(outcome, InexactnessReport) or recovered_infeasible
    value, _ = oracle_solve(prob, restarts=8, seed=0)
    # margin over the relaxation value, derived by the angular-grid oracle:
    # the manifold optimum is -1, a gap of 1.0 >= 0.1
    assert value >= -2.0 + 0.1
    assert abs(value - (-1.0)) <= 1e-6


@criterion(4, "100 unconstrained instances match the closed form")
def test_criterion_04_closed_form_crosscheck():
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        p = int(rng.integers(1, n + 1))
        A0 = rng.standard_normal((p, n))
        prob = ElsProblem(n=n, p=p, A0=A0)
        sol, outcome = _pipeline(prob)
        _, v = solve_ls_svd(A0)
        assert abs(sol.value - v) <= 1e-6
        assert not isinstance(outcome, InexactnessReport)
        point, trace = outcome
        _TRACES.append((n, p, trace))
        assert point.orth_residual <= 1e-7
        assert abs(prob.objective(point.X) - sol.value) <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"runtime {elapsed:.1f}s exceeds 30s"


@criterion(5, "100 constrained instances: pipeline equals oracle in the exact regime")
def test_criterion_05_exactness_property():
    start = time.perf_counter()
    rng = np.random.default_rng(505)
    for i in range(100):
        prob, _ = random_feasible_problem(rng, n_max=6, k_max=3)
        sol, outcome = _pipeline(prob)
        assert not isinstance(outcome, InexactnessReport), f"instance {i}"
        point, trace = outcome
        _TRACES.append((prob.n, prob.p, trace))
        assert point.feasible(1e-6), f"instance {i}"
        pipeline_value = prob.objective(point.X)
        value, _ = _oracle_with_retry(prob, pipeline_value, 1e-5, seed=i)
        assert abs(pipeline_value - value) <= 1e-5, f"instance {i}: {pipeline_value} vs {value}"
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"runtime {elapsed:.1f}s exceeds 5min"


@criterion(6, "reduction traces: monotone rank, bounded drift, terminal rank n")
def test_criterion_06_reduction_trace_invariants():
    traces = list(_TRACES)
    if not traces:  # criterion run in isolation: generate fresh traces
        rng = np.random.default_rng(606)
        for _ in range(20):
            prob, _ = random_feasible_problem(rng)
            _, outcome = _pipeline(prob)
            assert not isinstance(outcome, InexactnessReport)
            traces.append((prob.n, prob.p, outcome[1]))
    assert traces
    for n, p, trace in traces:
        ranks = [step.rank for step in trace]
        assert all(a > b for a, b in zip(ranks, ranks[1:]))
        assert ranks[-1] == n
        assert len(trace) - 1 <= p
        for step in trace:
            assert step.max_drift <= 1e-8
            assert abs(step.objective - trace[0].objective) <= 1e-8


@criterion(7, "multiplier certificate separates the two circle stationary points")
def test_criterion_07_certificate_values():
    prob = build_fixture("example-5.1")
    up = np.array([[0.0], [1.0]])
    fit = fit_multipliers(prob, up, active_set(prob, up))
    assert fit.lam[0] == pytest.approx(1.0, abs=1e-8)
    assert fit.Lambda[0, 0] == pytest.approx(2.0, abs=1e-8)
    verdict = certify_global(prob, up)
    assert verdict.is_global and verdict.route == "lemma-5.1"

    down = np.array([[0.0], [-1.0]])
    fit = fit_multipliers(prob, down, active_set(prob, down))
    assert fit.Lambda[0, 0] == pytest.approx(-2.0, abs=1e-8)
    verdict = certify_global(prob, down)
    assert not verdict.is_global


@criterion(8, "constraint Jacobian ranks 3 and 4 at the two feasible points")
def test_criterion_08_licq_ranks():
    prob = build_fixture("example-5.2")
    Xbar = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
    Xtil = np.array(
        [
            [0.5, 0.0],
            [0.5, np.sqrt(2.0) / 2.0],
            [0.0, 0.5],
            [np.sqrt(2.0) / 2.0, -0.5],
        ]
    )
    _, rank_bar = licq_check(prob, Xbar, active_set(prob, Xbar))
    _, rank_til = licq_check(prob, Xtil, active_set(prob, Xtil))
    assert rank_bar == 3
    assert rank_til == 4


@criterion(9, "600 convex combinations of manifold images admit recovered preimages")
def test_criterion_09_range_convexity_probe():
    from els.rangeprobe import RangeQuery, recover_g1

    start = time.perf_counter()
    rng = np.random.default_rng(909)
    for n, p, k in ((4, 1, 2), (5, 2, 2), (6, 3, 3)):
        assert p <= n - k
        for _ in range(200):
            matrices = [rng.standard_normal((p, n)) for _ in range(k)]
            X1 = random_stiefel(n, p, rng)
            X2 = random_stiefel(n, p, rng)
            t = float(rng.uniform(0.0, 1.0))
            target = np.array(
                [
                    t * np.trace(A @ X1) + (1.0 - t) * np.trace(A @ X2)
                    for A in matrices
                ]
            )
            outcome = recover_g1(RangeQuery(matrices=matrices, target=target), TIGHT)
            assert not isinstance(outcome, InexactnessReport), (n, p, k)
            assert outcome.orth_residual <= 1e-6
            values = np.array([np.trace(A @ outcome.X) for A in matrices])
            assert np.abs(values - target).max() <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 600.0, f"runtime {elapsed:.1f}s exceeds 10min"


@criterion(10, "50 pointwise-max instances: decomposition = epigraph = oracle")
def test_criterion_10_minimax_consistency():
    rng = np.random.default_rng(1010)
    for i in range(50):
        n = int(rng.integers(4, 7))
        m = int(rng.integers(1, 4))
        k = int(rng.integers(0, 2))
        p_max = n - k - m + 1
        p = int(rng.integers(1, min(p_max, 3) + 1))
        Xbar = random_stiefel(n, p, rng)
        cons = []
        for _ in range(k):
            A = rng.standard_normal((p, n))
            v = float(np.trace(A @ Xbar))
            cons.append(LinearConstraint(A=A, upper=v + float(rng.uniform(0.1, 0.6))))
        pieces = [
            MinimaxPiece(A=rng.standard_normal((p, n)), c=float(rng.uniform(-1.0, 1.0)))
            for _ in range(m)
        ]
        mm = MinimaxProblem(
            base=ElsProblem(n=n, p=p, A0=np.zeros((p, n)), constraints=cons),
            pieces=pieces,
        )
        dec = solve_minimax(mm, TIGHT)
        assert dec.exact and dec.point is not None, f"instance {i}"
        epi = solve_minimax_epigraph(mm, TIGHT)
        assert abs(dec.value - epi) <= 1e-6, f"instance {i}: {dec.value} vs {epi}"
        oracle = minimax_oracle(mm, restarts=30, seed=i)
        if abs(dec.value - oracle) > 1e-5:
            oracle = minimax_oracle(mm, restarts=200, seed=i + 1000)
        assert abs(dec.value - oracle) <= 1e-5, f"instance {i}: {dec.value} vs {oracle}"


@criterion(11, "assignment relaxation lower-bounds the permutation brute force")
def test_criterion_11_assignment_soundness():
    rng = np.random.default_rng(1111)
    for n in (2, 3, 4, 5):
        for _ in range(3):
            A0 = rng.standard_normal((n, n))
            prob = build_fixture("assignment", A0=A0)
            sol = solve_cr(prob, TIGHT)
            assert sol.status == "optimal"
            brute, perm = assignment_oracle(A0)
            assert sol.value <= brute + 1e-6
            # the permutation the brute force found is feasible for the instance
            P = np.zeros((n, n))
            for j, i in enumerate(perm):
                P[i, j] = 1.0
            assert residuals(prob, P).feasible(1e-12)
