"""Objective, gradient, direction oracle, line search, and the solve loop."""

from __future__ import annotations

import numpy as np
import pytest

from manymatch import (
    Pins,
    SolverConfig,
    fw_direction,
    gradient,
    initialize,
    line_search,
    objective,
    solve_relaxed,
)
from oracle_utils import (
    brute_semi_assignment,
    finite_difference_grad,
    grid_line_search,
    path_graph,
    random_feasible_pair,
)

TWO_PATH = path_graph(2)
THREE_PATH = path_graph(3)
P1_EXAMPLE = np.eye(2)
P2_EXAMPLE = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])


def test_identical_aligned_graphs_score_zero():
    g = path_graph(4)
    assert objective(g, g, np.eye(4), np.eye(4)) == 0.0


def test_two_path_three_path_worked_example():
    assert objective(TWO_PATH, THREE_PATH, P1_EXAMPLE, P2_EXAMPLE) == 4.0


def test_neighbor_merge_discount_worked_example():
    cfg = SolverConfig(mu=1.0)
    # Merging the adjacent vertices 1,2 of the 3-path earns back
    # tr(H^T P2^T P2) = 2, so 4 becomes 2.
    assert objective(TWO_PATH, THREE_PATH, P1_EXAMPLE, P2_EXAMPLE, cfg) == 2.0


def test_similarity_term_blends_linearly():
    rng = np.random.default_rng(0)
    C = rng.normal(size=(2, 3))
    lam = 0.4
    cfg = SolverConfig(lam=lam, similarity=C)
    structural = objective(TWO_PATH, THREE_PATH, P1_EXAMPLE, P2_EXAMPLE)
    linear = float(np.vdot(C, P1_EXAMPLE.T @ P2_EXAMPLE))
    expected = (1 - lam) * structural + lam * linear
    value = objective(TWO_PATH, THREE_PATH, P1_EXAMPLE, P2_EXAMPLE, cfg)
    assert value == pytest.approx(expected, abs=1e-12)


def test_negate_similarity_flips_the_linear_term():
    C = np.ones((2, 3))
    plus = SolverConfig(lam=1.0, similarity=C)
    minus = SolverConfig(lam=1.0, similarity=C, negate_similarity=True)
    a = objective(TWO_PATH, THREE_PATH, P1_EXAMPLE, P2_EXAMPLE, plus)
    b = objective(TWO_PATH, THREE_PATH, P1_EXAMPLE, P2_EXAMPLE, minus)
    assert a == -b != 0.0


def test_config_validation():
    with pytest.raises(ValueError, match="lam"):
        SolverConfig(lam=1.5, similarity=np.zeros((2, 2)))
    with pytest.raises(ValueError, match="requires a similarity"):
        SolverConfig(lam=0.5)
    with pytest.raises(ValueError, match="epsilon"):
        SolverConfig(epsilon=0.0)
    with pytest.raises(ValueError, match="k_max"):
        SolverConfig(k_max=0)
    with pytest.raises(ValueError, match="mu"):
        SolverConfig(mu=-1.0)
    with pytest.raises(ValueError, match="max_iters"):
        SolverConfig(max_iters=0)


def test_objective_shape_validation():
    with pytest.raises(ValueError, match="columns"):
        objective(TWO_PATH, THREE_PATH, np.eye(3), P2_EXAMPLE)
    with pytest.raises(ValueError, match="row count"):
        objective(TWO_PATH, THREE_PATH, np.eye(2), np.eye(3))
    with pytest.raises(ValueError, match="similarity must have shape"):
        cfg = SolverConfig(lam=0.5, similarity=np.zeros((3, 3)))
        objective(TWO_PATH, THREE_PATH, P1_EXAMPLE, P2_EXAMPLE, cfg)


def test_gradient_zero_at_zero_residual():
    g = path_graph(3)
    g1, g2 = gradient(g, g, np.eye(3), np.eye(3))
    assert np.all(g1 == 0.0) and np.all(g2 == 0.0)


def test_gradient_pure_similarity_case():
    rng = np.random.default_rng(1)
    C = rng.normal(size=(2, 3))
    cfg = SolverConfig(lam=1.0, similarity=C)
    p1, p2 = random_feasible_pair(rng, 2, 3)
    g1, g2 = gradient(TWO_PATH, THREE_PATH, p1, p2, cfg)
    assert np.allclose(g1, p2 @ C.T, atol=1e-14)
    assert np.allclose(g2, p1 @ C, atol=1e-14)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    for case in range(10):
        n_g = int(rng.integers(2, 6))
        n_h = int(rng.integers(2, 6))
        G = rng.normal(size=(n_g, n_g))
        H = rng.normal(size=(n_h, n_h))
        lam = float(rng.uniform(0.0, 1.0)) if case % 2 else 0.0
        mu = float(rng.uniform(0.0, 2.0)) if case % 3 else 0.0
        C = rng.normal(size=(n_g, n_h)) if lam > 0 else None
        cfg = SolverConfig(lam=lam, mu=mu, similarity=C)
        p1, p2 = random_feasible_pair(rng, n_g, n_h)
        a1, a2 = gradient(G, H, p1, p2, cfg)
        f1, f2 = finite_difference_grad(G, H, p1, p2, cfg)
        for analytic, numeric in ((a1, f1), (a2, f2)):
            scale = max(1.0, float(np.abs(analytic).max()))
            assert np.abs(analytic - numeric).max() / scale < 1e-6


def test_fw_direction_is_deterministic_on_ties():
    cfg = SolverConfig(k_max=2)
    zero = np.zeros((2, 3))
    first = fw_direction(zero, zero.copy(), cfg)
    second = fw_direction(zero.copy(), zero, cfg)
    assert np.array_equal(first[0], second[0])
    assert np.array_equal(first[1], second[1])


def test_fw_direction_picks_column_minima_under_slack():
    grad = np.array([[0.0, 5.0, 5.0], [5.0, 0.0, 5.0], [5.0, 5.0, 0.0]])
    q1, q2 = fw_direction(grad, grad, SolverConfig(k_max=3))
    assert np.array_equal(q1, np.eye(3))
    assert np.array_equal(q2, np.eye(3))


def test_fw_direction_matches_enumeration():
    rng = np.random.default_rng(3)
    cfg = SolverConfig(k_max=2)
    for _ in range(10):
        grad1 = rng.normal(size=(3, 4))
        grad2 = rng.normal(size=(3, 5))
        q1, q2 = fw_direction(grad1, grad2, cfg)
        assert float(np.vdot(grad1, q1)) == pytest.approx(
            brute_semi_assignment(grad1, 2), abs=1e-9
        )
        assert float(np.vdot(grad2, q2)) == pytest.approx(
            brute_semi_assignment(grad2, 2), abs=1e-9
        )


def test_line_search_stalls_on_zero_direction():
    g = path_graph(3)
    p1, p2 = initialize(3, 3)
    result = line_search(g, g, p1, p2, p1.copy(), p2.copy())
    assert result.alpha == 0.0
    assert result.stalled


def test_line_search_recovers_quadratic_minimum():
    # With lam=1 the objective is bilinear, so the segment profile is the
    # quadratic phi(alpha) = (alpha - 0.3)^2 + 1 for this similarity matrix
    # (both endpoints are permutation pairs; the cross terms are read off
    # cyclic-shift products).
    R = np.zeros((3, 3))
    R[0, 1] = R[1, 2] = R[2, 0] = 1.0
    C = np.array([[1.09, 1.49, 0.79], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    cfg = SolverConfig(k_max=1, lam=1.0, similarity=C)
    empty = np.zeros((3, 3))
    result = line_search(empty, empty, np.eye(3), np.eye(3), R, R @ R, cfg)
    assert result.alpha == pytest.approx(0.3, abs=1e-9)
    assert result.value == pytest.approx(1.0, abs=1e-9)
    assert not result.stalled


def test_line_search_beats_dense_grid():
    rng = np.random.default_rng(4)
    for _ in range(3):
        n = 4
        G = rng.normal(size=(n, n))
        H = rng.normal(size=(n, n))
        cfg = SolverConfig(k_max=2)
        p1, p2 = random_feasible_pair(rng, n, n)
        q1, q2 = fw_direction(*gradient(G, H, p1, p2, cfg), cfg)
        result = line_search(G, H, p1, p2, q1, q2, cfg)
        _, grid_value = grid_line_search(G, H, p1, p2, q1, q2, cfg, step=1e-4)
        assert result.value <= grid_value + 1e-9
        endpoints = min(
            objective(G, H, p1, p2, cfg), objective(G, H, q1, q2, cfg)
        )
        assert result.value <= endpoints + 1e-12


def test_initialize_square_and_rectangular():
    p1, p2 = initialize(3, 3)
    assert np.allclose(p1, 1.0 / 3.0)
    assert np.array_equal(p2, np.eye(3))
    p1, p2 = initialize(2, 4)
    assert np.array_equal(p2, [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]])
    for n_g, n_h in ((2, 4), (5, 3), (4, 4)):
        a, b = initialize(n_g, n_h, SolverConfig(k_max=3))
        assert np.allclose(a.sum(axis=0), 1.0)
        assert np.allclose(b.sum(axis=0), 1.0)


def test_initialize_rejects_small_k_max():
    with pytest.raises(ValueError, match="cannot place"):
        initialize(2, 5, SolverConfig(k_max=2))


def test_solve_identical_three_paths_reaches_zero():
    g = path_graph(3)
    trace = solve_relaxed(g, g, SolverConfig(k_max=1))
    assert trace.final_objective <= 1e-6
    assert trace.reason == "converged"


def test_infinite_epsilon_means_one_iteration():
    g = path_graph(4)
    trace = solve_relaxed(g, g, SolverConfig(epsilon=np.inf))
    assert trace.iterations == 1
    assert len(trace.objectives) == 2


def _check_trace_invariants(trace, k_max):
    diffs = np.diff(trace.objectives)
    assert (diffs <= 1e-12).all()
    assert (np.asarray(trace.gaps) >= -1e-10).all()
    for p in (trace.p1, trace.p2):
        assert np.allclose(p.sum(axis=0), 1.0, atol=1e-10)
        assert (p.sum(axis=1) <= k_max + 1e-10).all()
        assert p.min() >= -1e-12 and p.max() <= 1.0 + 1e-12


def test_solve_traces_are_monotone_and_feasible():
    rng = np.random.default_rng(5)
    for case in range(6):
        n_g = int(rng.integers(3, 7))
        n_h = int(rng.integers(3, 7))
        G = np.triu(rng.random((n_g, n_g)) < 0.5, 1).astype(float)
        H = np.triu(rng.random((n_h, n_h)) < 0.5, 1).astype(float)
        G, H = G + G.T, H + H.T
        lam = 0.3 if case % 2 else 0.0
        C = rng.normal(size=(n_g, n_h)) if lam else None
        mu = 0.5 if case % 3 == 0 else 0.0
        cfg = SolverConfig(k_max=2, lam=lam, mu=mu, similarity=C, max_iters=200)
        trace = solve_relaxed(G, H, cfg)
        _check_trace_invariants(trace, cfg.k_max)


def test_binary_one_to_one_case_equals_permutation_objective():
    # With k_max=1, equal sizes, and permutation-pair assignments the
    # objective collapses to ||G - P H P^T||_F^2 for P = P1^T P2.
    import itertools

    rng = np.random.default_rng(6)
    G = np.triu(rng.random((4, 4)) < 0.5, 1).astype(float)
    H = np.triu(rng.random((4, 4)) < 0.5, 1).astype(float)
    G, H = G + G.T, H + H.T
    eye = np.eye(4)
    for perm1 in itertools.permutations(range(4)):
        for perm2 in itertools.permutations(range(4)):
            p1, p2 = eye[list(perm1)], eye[list(perm2)]
            P = p1.T @ p2
            direct = float(((G - P @ H @ P.T) ** 2).sum())
            assert objective(G, H, p1, p2) == pytest.approx(direct, abs=1e-9)


def test_pinned_columns_stay_pinned():
    rng = np.random.default_rng(7)
    G = np.triu(rng.random((4, 4)) < 0.6, 1).astype(float)
    H = np.triu(rng.random((4, 4)) < 0.6, 1).astype(float)
    G, H = G + G.T, H + H.T
    pins = Pins(g_rows={0: 2}, h_rows={1: 2})
    trace = solve_relaxed(G, H, SolverConfig(k_max=2, pins=pins, max_iters=50))
    expected_col = np.zeros(4)
    expected_col[2] = 1.0
    assert np.array_equal(trace.p1[:, 0], expected_col)
    assert np.array_equal(trace.p2[:, 1], expected_col)
    _check_trace_invariants(trace, 2)
