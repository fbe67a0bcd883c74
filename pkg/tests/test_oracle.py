import numpy as np
import pytest

from tightext import (
    AdmmConfig,
    BoundaryProblem,
    IterationConfig,
    OracleConfig,
    VertexFunction,
    WeightedGraph,
    brute_force_Is,
    brute_force_prox,
    extend_inf_harmonic,
    minimize_Is,
    verify_tight,
)
from tightext.oracle import _brute_force_Is_history

from helpers import (
    F2,
    U1,
    embed_interior,
    path_problem,
    random_connected_problem,
    six_node_problem,
)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(grid_resolution=2)
        with pytest.raises(ValueError):
            OracleConfig(refinement_rounds=0)

    def test_box_must_contain_boundary_values(self):
        prob = path_problem({0: 0.0, 2: 5.0})
        with pytest.raises(ValueError, match="contain"):
            brute_force_Is(prob, 2.0, OracleConfig(value_box=((0.0, 1.0),)))


class TestBruteForceIs:
    def test_path_symmetry(self):
        prob = path_problem({0: 0.0, 2: 1.0})
        u, obj = brute_force_Is(prob, 4.0)
        assert u.data[1, 0] == pytest.approx(0.5, abs=1e-6)
        assert obj == pytest.approx(0.5 ** 4, abs=1e-6)

    def test_dimension_guard(self):
        rng = np.random.default_rng(0)
        graph = WeightedGraph(8, [(i, i + 1, 1.0) for i in range(7)])
        prob = BoundaryProblem(graph, [0], [[0.0]])  # 7 interior scalars
        with pytest.raises(ValueError, match="at most 6"):
            brute_force_Is(prob, 2.0)

    def test_history_monotone(self):
        rng = np.random.default_rng(13)
        prob = random_connected_problem(rng, max_nodes=5, m=2, max_interior=2)
        hist = _brute_force_Is_history(prob, 4.0, OracleConfig())
        assert all(a >= b - 1e-15 for a, b in zip(hist, hist[1:]))

    def test_single_interior_node_is_weighted_ball_center(self):
        # one free node with two fixed neighbors at different weights: compare
        # against a direct dense 2-D grid
        graph = WeightedGraph(3, [(0, 2, 1.0), (1, 2, 0.25)])
        prob = BoundaryProblem(graph, [0, 1], [[0.0, 0.0], [1.0, 1.0]])
        u, obj = brute_force_Is(prob, 8.0)

        g0 = np.linspace(-0.5, 1.5, 401)
        pts = np.stack(np.meshgrid(g0, g0, indexing="ij"), axis=-1).reshape(-1, 2)
        d0 = np.linalg.norm(pts - np.array([0.0, 0.0]), axis=1)
        d1 = 0.5 * np.linalg.norm(pts - np.array([1.0, 1.0]), axis=1)
        vals = np.maximum(d0, d1) ** 8.0
        best = pts[np.argmin(vals)]
        assert np.abs(u.data[2] - best).max() < 2e-2
        assert obj <= vals.min() + 1e-9

    def test_matches_admm_on_six_node_instance(self):
        prob = six_node_problem()
        u, obj = brute_force_Is(prob, 10.0)
        _, rep = minimize_Is(prob, AdmmConfig(s=10.0))
        assert abs(obj - rep.objective) < 1e-4

    def test_scalar_large_s_tracks_harmonic(self):
        graph = WeightedGraph(6, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 1.0),
                                  (3, 4, 0.25), (4, 5, 1.0), (1, 4, 0.7)])
        prob = BoundaryProblem(graph, [0, 5], [[0.0], [2.0]])
        uh, _ = extend_inf_harmonic(prob, IterationConfig(tol=1e-12))
        ub, _ = brute_force_Is(prob, 24.0)
        assert np.abs(uh.data - ub.data).max() < 1e-3


class TestBruteForceProx:
    def test_zero_input(self):
        assert np.array_equal(brute_force_prox(np.zeros((2, 2)), 4.0, 1.0), np.zeros((2, 2)))

    def test_scalar_analytic(self):
        z = brute_force_prox(np.array([3.0]), 2.0, 1.0)
        assert z[0] == pytest.approx(1.0, abs=1e-7)

    def test_two_groups(self):
        z = brute_force_prox(np.array([3.0, 0.5]), 2.0, 1.0)
        assert z[0] == pytest.approx(1.0, abs=1e-7)
        assert z[1] == pytest.approx(0.5, abs=1e-7)

    def test_dimension_guard(self):
        with pytest.raises(ValueError, match="at most 4"):
            brute_force_prox(np.zeros((5, 1)), 2.0, 1.0)

    def test_deterministic(self):
        x = np.array([[1.3, -0.2], [0.4, 0.9]])
        a = brute_force_prox(x, 6.0, 0.7)
        b = brute_force_prox(x, 6.0, 0.7)
        assert np.array_equal(a, b)


class TestVerifyTight:
    def test_accepts_the_tight_extension(self):
        prob = six_node_problem()
        assert verify_tight(embed_interior(prob, F2), prob)

    def test_rejects_the_harmonic_nontight_extension(self):
        prob = six_node_problem()
        assert not verify_tight(embed_interior(prob, U1), prob)

    def test_constant_extension_of_constant_data(self):
        prob = path_problem({0: 0.25, 3: 0.25}, n=4)
        u = VertexFunction(np.full((4, 1), 0.25))
        assert verify_tight(u, prob)

    def test_dimension_guard(self):
        graph = WeightedGraph(9, [(i, i + 1, 1.0) for i in range(8)])
        prob = BoundaryProblem(graph, [0], [[0.0]])
        with pytest.raises(ValueError, match="at most 6"):
            verify_tight(VertexFunction.zeros(9), prob)
