import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tightext.tight as tight_mod
from tightext import (
    AdmmConfig,
    BoundaryProblem,
    IterationConfig,
    VertexFunction,
    WeightedGraph,
    assemble,
    energy_Is,
    energy_logexp,
    extend_inf_harmonic,
    least_squares_step,
    lipschitz_profile,
    minimize_Is,
    prox_conj_group_maxnorm_pow,
    prox_group_maxnorm_pow,
    tight_extension,
)
from tightext.oracle import OracleConfig, brute_force_Is, brute_force_prox

from helpers import (
    F2,
    embed_interior,
    nonstrict_convexity_problem,
    path_problem,
    random_connected_problem,
    six_node_problem,
    star_problem,
)


class TestAssemble:
    def test_path_blocks(self):
        prob = path_problem({0: 0.0, 2: 1.0})
        sys = assemble(prob)
        assert sys.interior.tolist() == [1]
        assert sys.group_sizes.tolist() == [2]
        assert sys.B.toarray().tolist() == [[1.0], [1.0]]
        assert sys.offsets.tolist() == [[0.0], [1.0]]

    def test_six_node_shapes(self):
        sys = assemble(six_node_problem())
        assert sys.interior_count == 3
        assert sys.group_sizes.tolist() == [3, 3, 3]
        assert sys.B.shape == (9, 3)

    def test_blocks_reproduce_local_lipschitz(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            prob = random_connected_problem(rng, max_nodes=8, m=2)
            sys = assemble(prob)
            u = prob.embed(rng.normal(size=(prob.interior.size, 2)))
            res = sys.residual_groups(u.data[prob.interior])
            su = lipschitz_profile(u, prob).per_node
            for i in range(sys.interior_count):
                rows = res[sys.group_ptr[i]:sys.group_ptr[i + 1]]
                block_su = np.linalg.norm(rows, axis=1).max()
                assert block_su == pytest.approx(su[i], rel=1e-12, abs=1e-14)

    def test_all_boundary_is_error(self):
        graph = WeightedGraph(2, [(0, 1, 1.0)])
        prob = BoundaryProblem(graph, [0, 1], [[0.0], [1.0]])
        with pytest.raises(ValueError, match="nothing to extend"):
            assemble(prob)

    def test_interior_cut_off_from_boundary_is_error(self):
        graph = WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)], require_connected=False)
        prob = BoundaryProblem(graph, [0], [[1.0]])
        with pytest.raises(ValueError, match="not connected to the boundary"):
            assemble(prob)


class TestEnergies:
    def test_quadratic_energy_on_witness_is_exactly_nine(self):
        prob, u, v = nonstrict_convexity_problem()
        mid = VertexFunction((u.data + v.data) / 2.0)
        assert energy_Is(u, prob, 2.0) == 9.0
        assert energy_Is(v, prob, 2.0) == 9.0
        assert energy_Is(mid, prob, 2.0) == 9.0

    def test_star_energies_separate_minimizers(self):
        prob = star_problem()
        u = VertexFunction([[1.0], [0.0], [-1.0], [0.0]])
        v = VertexFunction([[1.0], [0.0], [-1.0], [1.0]])
        for p in (1.0, 2.0, 7.0):
            assert energy_Is(u, prob, p) == pytest.approx(1.0)
            assert energy_Is(v, prob, p) == pytest.approx(2.0)

    def test_constant_extension_has_zero_energy(self):
        prob = path_problem({0: 0.3, 3: 0.3}, n=4)
        u = VertexFunction(np.full((4, 1), 0.3))
        assert energy_Is(u, prob, 5.0) == 0.0

    def test_boundary_mismatch_rejected(self):
        prob = star_problem()
        bad = VertexFunction([[0.0], [0.0], [-1.0], [0.0]])
        with pytest.raises(ValueError, match="boundary"):
            energy_Is(bad, prob, 2.0)
        with pytest.raises(ValueError, match="boundary"):
            energy_logexp(bad, prob, 2.0)

    def test_logexp_closed_form_constant_profile(self):
        prob = path_problem({0: 0.0, 3: 3.0}, n=4)
        u = VertexFunction([[0.0], [1.0], [2.0], [3.0]])  # all Su = 1
        for p in (0.5, 2.0, 10.0):
            assert energy_logexp(u, prob, p) == pytest.approx(1.0 + math.log(2) / p, rel=1e-12)

    def test_logexp_single_interior_is_exact(self):
        prob = path_problem({0: 0.0, 2: 1.0})
        u = VertexFunction([[0.0], [0.25], [1.0]])
        su = lipschitz_profile(u, prob).per_node[0]
        assert energy_logexp(u, prob, 7.0) == pytest.approx(su, rel=1e-12)

    def test_logexp_approaches_max(self):
        prob = star_problem()
        u = VertexFunction([[1.0], [0.0], [-1.0], [0.0]])  # profile (1, 0)
        for p in (50.0, 200.0):
            val = energy_logexp(u, prob, p)
            assert 1.0 <= val <= 1.0 + math.log(2) / p

    def test_logexp_overflow_safe(self):
        prob = path_problem({0: 0.0, 2: 100.0})
        u = VertexFunction([[0.0], [50.0], [100.0]])
        assert np.isfinite(energy_logexp(u, prob, 50.0))

    @given(seed=st.integers(0, 5000))
    @settings(max_examples=30)
    def test_midpoint_convexity(self, seed):
        rng = np.random.default_rng(seed)
        prob = random_connected_problem(rng, max_nodes=7, m=2)
        mk = lambda: prob.embed(rng.normal(size=(prob.interior.size, 2)))
        u, v = mk(), mk()
        mid = VertexFunction((u.data + v.data) / 2.0)
        s = float(rng.uniform(1.0, 12.0))
        left = energy_Is(mid, prob, s)
        right = 0.5 * energy_Is(u, prob, s) + 0.5 * energy_Is(v, prob, s)
        assert left <= right + 1e-10 * max(1.0, right)

    def test_block_energy_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            prob = random_connected_problem(rng, max_nodes=8, m=2)
            sys = assemble(prob)
            u = prob.embed(rng.normal(size=(prob.interior.size, 2)))
            s = float(rng.uniform(2.0, 20.0))
            res = sys.residual_groups(u.data[prob.interior])
            norms = np.linalg.norm(res, axis=1)
            block = sum(
                norms[sys.group_ptr[i]:sys.group_ptr[i + 1]].max() ** s
                for i in range(sys.interior_count)
            )
            assert block == pytest.approx(energy_Is(u, prob, s), rel=1e-11)


class TestProx:
    def test_zero_is_fixed(self):
        assert np.array_equal(prox_group_maxnorm_pow(np.zeros((3, 2)), 4.0, 2.0),
                              np.zeros((3, 2)))

    def test_scalar_quadratic_case(self):
        # for a single scalar group at s=2 the prox is x / (1 + 2 lam)
        z = prox_group_maxnorm_pow([3.0], 2.0, 1.0)
        assert z[0] == pytest.approx(1.0, rel=1e-12)

    def test_inactive_group_untouched(self):
        z = prox_group_maxnorm_pow([3.0, 0.5], 2.0, 1.0)
        assert z[0] == pytest.approx(1.0, rel=1e-12)
        assert z[1] == 0.5

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(2)
        # extra rounds: positional accuracy needs a finer grid than the
        # objective accuracy the defaults target
        cfg = OracleConfig(grid_resolution=9, refinement_rounds=9)
        for _ in range(6):
            n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            x = rng.normal(0, 1.5, (n, m))
            s = float(rng.uniform(2, 12))
            lam = float(rng.uniform(0.2, 4))
            z = prox_group_maxnorm_pow(x, s, lam)
            zb = brute_force_prox(x, s, lam, cfg)
            assert np.abs(z - zb).max() < 1e-5

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError, match="s must"):
            prox_group_maxnorm_pow([1.0], 1.5, 1.0)
        with pytest.raises(ValueError, match="lam"):
            prox_group_maxnorm_pow([1.0], 2.0, 0.0)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=100)
    def test_moreau_identity(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        x = rng.normal(0, 2, (n, m))
        s = float(rng.uniform(2, 40))
        lam = float(rng.uniform(0.1, 10))
        z = prox_group_maxnorm_pow(x, s, lam)
        y = prox_conj_group_maxnorm_pow(x, s, lam)
        assert np.abs(z + y - x).max() <= 1e-9 * max(1.0, np.abs(x).max())

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=20)
    def test_prox_point_is_optimal_among_perturbations(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        x = rng.normal(0, 1.5, (n, m))
        s = float(rng.uniform(2, 20))
        lam = float(rng.uniform(0.2, 5))

        def objective(z):
            return np.sum((z - x) ** 2) / (2 * lam) + np.linalg.norm(z, axis=1).max() ** s

        z = prox_group_maxnorm_pow(x, s, lam)
        fz = objective(z)
        for scale in (1e-1, 1e-3):
            pert = rng.normal(0, scale, (500, n, m))
            vals = np.array([objective(z + d) for d in pert])
            assert fz <= vals.min() + 1e-12 * max(1.0, fz)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=50)
    def test_root_equation_bracket_and_residual(self, seed):
        # the truncation radius solves s*lam*t**(s-1) + K*t = R inside [0, R/K]
        rng = np.random.default_rng(seed)
        K = int(rng.integers(1, 6))
        R = float(rng.uniform(0.0, 12.0))
        s = float(rng.uniform(2.0, 40.0))
        lam = float(rng.uniform(0.1, 10.0))
        from tightext.tight import _tau_root_batch

        tau = float(_tau_root_batch(np.array([R]), K, s, lam, 1e-13)[0])
        g = lambda t: s * lam * t ** (s - 1.0) + K * t - R
        assert 0.0 <= tau <= R / K + 1e-15
        assert g(0.0) <= 0.0
        if R > 0:
            assert g(R / K) >= 0.0
            assert abs(g(tau)) <= 1e-9 * max(1.0, R)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40)
    def test_dual_norm_pairing(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        x = rng.normal(0, 2, (n, m))
        y = rng.normal(0, 2, (n, m))
        inner = float(np.sum(x * y))
        n21 = float(np.linalg.norm(x, axis=1).sum())
        n2inf = float(np.linalg.norm(y, axis=1).max())
        assert inner <= n21 * n2inf + 1e-12
        # alignment achieves equality
        norms = np.linalg.norm(x, axis=1)
        if (norms > 0).all():
            c = 1.7
            aligned = c * x / norms[:, None]
            lhs = float(np.sum(x * aligned))
            assert lhs == pytest.approx(n21 * c, rel=1e-12)


class TestLeastSquares:
    def test_consistent_system_recovered(self):
        rng = np.random.default_rng(4)
        prob = random_connected_problem(rng, max_nodes=8, m=2)
        sys = assemble(prob)
        u0 = rng.normal(size=(sys.interior_count, 2))
        rhs = sys.matvec(u0)
        u = least_squares_step(sys, rhs)
        assert np.abs(u - u0).max() < 1e-10

    def test_path_normal_equation(self):
        prob = path_problem({0: 0.0, 2: 1.0})
        sys = assemble(prob)
        u = least_squares_step(sys, np.array([[0.0], [1.0]]))
        assert u[0, 0] == pytest.approx(0.5, rel=1e-14)

    def test_zero_rhs(self):
        prob = path_problem({0: 0.0, 2: 1.0})
        sys = assemble(prob)
        assert np.array_equal(least_squares_step(sys, np.zeros((2, 1))), np.zeros((1, 1)))

    def test_shape_mismatch_rejected(self):
        prob = path_problem({0: 0.0, 2: 1.0})
        sys = assemble(prob)
        with pytest.raises(ValueError, match="shape"):
            least_squares_step(sys, np.zeros((3, 1)))

    def test_iterative_fallback_matches_factorization(self, monkeypatch):
        rng = np.random.default_rng(6)
        prob = random_connected_problem(rng, max_nodes=8, m=1)
        sys_direct = assemble(prob)
        monkeypatch.setattr(tight_mod, "_ITERATIVE_LIMIT", 0)
        sys_cg = assemble(prob)
        rhs = rng.normal(size=(sys_direct.B.shape[0], 1))
        a = least_squares_step(sys_direct, rhs)
        b = least_squares_step(sys_cg, rhs)
        assert np.abs(a - b).max() < 1e-9


class TestMinimize:
    def test_path_midpoint_for_all_s(self):
        prob = path_problem({0: 0.0, 2: 1.0})
        for s in (2.0, 10.0, 40.0):
            u, rep = minimize_Is(prob, AdmmConfig(s=s))
            assert rep.converged
            assert u.data[1, 0] == pytest.approx(0.5, abs=1e-7)

    def test_six_node_tight_extension(self):
        prob = six_node_problem()
        u, rep = minimize_Is(prob, AdmmConfig(s=10.0))
        assert rep.converged
        expected = embed_interior(prob, F2)
        assert np.abs(u.data - expected.data).max() < 1e-6

    def test_boundary_values_reinserted_exactly(self):
        prob = six_node_problem()
        u, _ = minimize_Is(prob, AdmmConfig(s=10.0))
        assert np.array_equal(u.data[prob.boundary], prob.values)

    def test_objective_matches_oracle_on_random_instance(self):
        rng = np.random.default_rng(9)
        prob = random_connected_problem(rng, max_nodes=5, m=2, max_interior=3)
        u, rep = minimize_Is(prob, AdmmConfig(s=4.0))
        _, obj = brute_force_Is(prob, 4.0)
        assert rep.converged
        assert abs(rep.objective - obj) < 1e-4

    def test_max_iters_reports_not_raises(self):
        prob = six_node_problem()
        u, rep = minimize_Is(prob, AdmmConfig(s=10.0, max_iters=3))
        assert not rep.converged
        assert rep.iterations == 3

    def test_s_out_of_range(self):
        with pytest.raises(ValueError, match="at least 2"):
            AdmmConfig(s=1.0)
        with pytest.raises(ValueError, match="cap"):
            AdmmConfig(s=100.0)

    def test_constant_boundary_short_circuit(self):
        prob = path_problem({0: 0.4, 3: 0.4}, n=4)
        u, rep = minimize_Is(prob, AdmmConfig(s=20.0))
        assert rep.converged and rep.objective == 0.0
        assert np.allclose(u.data, 0.4)

    def test_primal_feasibility_at_convergence(self):
        prob = six_node_problem()
        cfg = AdmmConfig(s=10.0)
        u, rep = minimize_Is(prob, cfg)
        assert rep.primal_residual < cfg.tol_primal


class TestTightExtension:
    def test_star_prefers_low_energy_minimizer(self):
        prob = star_problem()
        u = tight_extension(prob, 20.0)
        assert abs(u.data[1, 0]) < 1e-6   # midpoint of +-1
        assert abs(u.data[3, 0]) < 1e-3   # pendant collapses onto the center

    def test_six_node_values(self):
        prob = six_node_problem()
        u = tight_extension(prob, 10.0)
        expected = embed_interior(prob, F2)
        assert np.abs(u.data - expected.data).max() < 1e-6

    def test_scalar_case_agrees_with_harmonic(self):
        rng = np.random.default_rng(21)
        for _ in range(4):
            prob = random_connected_problem(rng, max_nodes=8)
            uh, _ = extend_inf_harmonic(prob, IterationConfig(tol=1e-12))
            ut = tight_extension(prob, 40.0)
            assert np.abs(uh.data - ut.data).max() < 1e-4
