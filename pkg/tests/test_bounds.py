import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from qnuisance.bounds import (
    BoundResult,
    WeightMatrix,
    classical_weight_elimination,
    hgm_bound,
    nagaoka_bound,
    nui_bound_11,
    nui_bound_12,
    nui_bound_21,
    sld_cr_bound,
    split_orthogonal_blocks,
    tradeoff_det_check,
    weight_limit_bound,
)
from qnuisance.errors import (
    DeltaOutOfRange,
    NotBlockDiagonal,
    NuisanceVarianceTooSmall,
    ShapeMismatch,
)
from qnuisance.fisher import sld_fisher
from qnuisance.models import make_builtin
from qnuisance.povm import locally_unbiased_estimator, mse_matrix, pvm_from_direction
from qnuisance.povm import OracleConfig, _random_4_outcome

from conftest import random_spd, weight_grid_search


class TestSldCrBound:
    def test_model_e_values(self):
        assert sld_cr_bound(np.eye(2), np.diag([0.75, 4.0])) == pytest.approx(4.75)

    def test_zero_weight(self):
        assert sld_cr_bound(np.zeros((2, 2)), np.diag([0.75, 4.0])) == 0.0

    def test_linearity(self):
        assert sld_cr_bound(np.diag([2.0, 0.0]), np.diag([3.0, 5.0])) == pytest.approx(6.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            sld_cr_bound(np.eye(2), np.eye(3))


class TestNagaokaBound:
    def test_arithmetic(self):
        assert nagaoka_bound(np.eye(2), np.diag([0.64, 1.0])) == pytest.approx(3.24)

    def test_identity(self):
        assert nagaoka_bound(np.eye(2), np.eye(2)) == pytest.approx(4.0)

    def test_rank_one_weight_limit(self):
        # W -> (1,0)^T(1,0): the bound collapses to (G^-1)_11
        G_inv = np.array([[0.7, 0.2], [0.2, 1.3]])
        for eps in (1e-4, 1e-6, 1e-8):
            val = nagaoka_bound(np.diag([1.0, eps]), G_inv)
            assert abs(val - G_inv[0, 0]) < 3.0 * np.sqrt(eps)

    @given(st.integers(min_value=0, max_value=10 ** 6))
    @settings(max_examples=100, deadline=None)
    def test_dominates_sld_bound(self, seed):
        rng = np.random.default_rng(seed)
        W, G_inv = random_spd(rng, 2), random_spd(rng, 2)
        assert nagaoka_bound(W, G_inv) > sld_cr_bound(W, G_inv)


class TestHgmBound:
    def test_identity(self):
        assert hgm_bound(np.eye(3), np.eye(3)) == pytest.approx(9.0)

    def test_commuting_diagonal(self):
        assert hgm_bound(np.eye(3), np.diag([4.0, 1.0, 0.25])) == pytest.approx(12.25)

    def test_scipy_dual_path(self, rng):
        for _ in range(20):
            W, G_inv = random_spd(rng, 3), random_spd(rng, 3)
            ra = scipy.linalg.sqrtm(G_inv)
            expected = np.trace(scipy.linalg.sqrtm(ra @ W @ ra)).real ** 2
            assert hgm_bound(W, G_inv) == pytest.approx(expected, abs=1e-8)


class TestWeightLimit:
    def test_one_plus_one_model_e(self):
        res = weight_limit_bound("nagaoka-1+1", [[1.0]], np.diag([0.75, 4.0]))
        assert res.value == pytest.approx(0.75, abs=1e-7)
        assert res.components["closed_form"] == pytest.approx(0.75)

    def test_one_plus_one_scaling(self):
        G_inv = np.array([[0.7, 0.2], [0.2, 1.3]])
        one = weight_limit_bound("nagaoka-1+1", [[1.0]], G_inv).value
        two = weight_limit_bound("nagaoka-1+1", [[2.0]], G_inv).value
        assert two == pytest.approx(2.0 * one, rel=1e-6)

    def test_two_plus_one_closed_form(self, rng):
        # limit of the HGM bound equals the Nagaoka form on the interest block
        for _ in range(10):
            G_inv = random_spd(rng, 3)
            W_I = random_spd(rng, 2)
            res = weight_limit_bound("hgm-2+1", W_I, G_inv)
            assert res.value == pytest.approx(nagaoka_bound(W_I, G_inv[:2, :2]), rel=1e-6)

    def test_one_plus_two_closed_form(self, rng):
        for _ in range(10):
            G_inv = random_spd(rng, 3)
            res = weight_limit_bound("hgm-1+2", [[1.7]], G_inv)
            assert res.value == pytest.approx(1.7 * G_inv[0, 0], rel=1e-6)

    def test_unknown_kind(self):
        with pytest.raises(ShapeMismatch):
            weight_limit_bound("sld-1+1", [[1.0]], np.eye(2))


class TestNuiBound11:
    def test_model_e_values(self):
        res = nui_bound_11(np.diag([0.75, 4.0]), 0.0, 8.0)
        assert res.value == pytest.approx(1.5)
        assert res.components["baseline"] == pytest.approx(0.75)
        assert res.components["tradeoff"] == pytest.approx(0.75)
        assert res.components["symmetric_relaxation"] == pytest.approx(1.5)

    def test_large_nuisance_error_recovers_baseline(self):
        res = nui_bound_11(np.diag([0.75, 4.0]), 0.3, 1e12)
        assert res.value == pytest.approx(0.75, abs=1e-9)

    def test_algebraic_identity(self, rng):
        # V_IN = g12 and V_NN = g22 + det/c gives exactly g11 + c
        for _ in range(20):
            G_inv = random_spd(rng, 2)
            c = rng.uniform(0.1, 5.0)
            det = np.linalg.det(G_inv)
            res = nui_bound_11(G_inv, G_inv[0, 1], G_inv[1, 1] + det / c)
            assert res.value == pytest.approx(G_inv[0, 0] + c, rel=1e-12)

    def test_floor_violation(self):
        with pytest.raises(NuisanceVarianceTooSmall):
            nui_bound_11(np.diag([0.75, 4.0]), 0.0, 4.0)

    def test_dominates_weight_limit(self, rng):
        for _ in range(50):
            G_inv = random_spd(rng, 2)
            res = nui_bound_11(G_inv, rng.normal(), G_inv[1, 1] + rng.uniform(0.01, 20.0))
            limit = weight_limit_bound("nagaoka-1+1", [[1.0]], G_inv)
            assert res.value >= limit.value - 1e-9

    def test_invariant_under_nuisance_rescaling(self, rng):
        for _ in range(50):
            G_inv = random_spd(rng, 2)
            v_in, v_nn = rng.normal(), G_inv[1, 1] + rng.uniform(0.05, 5.0)
            a = rng.uniform(0.2, 5.0)
            scaled = np.array([[G_inv[0, 0], G_inv[0, 1] / a],
                               [G_inv[0, 1] / a, G_inv[1, 1] / a ** 2]])
            base = nui_bound_11(G_inv, v_in, v_nn).value
            other = nui_bound_11(scaled, v_in / a, v_nn / a ** 2).value
            assert other == pytest.approx(base, rel=1e-9)


class TestTradeoffDetCheck:
    def test_boundary_case(self):
        G = np.eye(2)
        assert tradeoff_det_check(2.0 * G, G) == pytest.approx(0.0)

    def test_sld_floor_is_infeasible(self):
        G = np.diag([0.5, 2.0])
        assert tradeoff_det_check(G, G) == pytest.approx(-1.0)

    def test_simulated_estimator_nonnegative(self):
        # full-scope LU estimator on model E through a 4-outcome POVM
        model = make_builtin("E")
        theta = np.array([0.5, 0.7])
        rng = np.random.default_rng(5)
        povm = _random_4_outcome(rng)
        est = locally_unbiased_estimator(model, theta, povm, scope="full")
        V = mse_matrix(model, theta, povm, est)
        G_inv = sld_fisher(model, theta).G_inv
        assert tradeoff_det_check(V, G_inv) >= -1e-9


class TestNuiBound12:
    def test_quarter_delta(self):
        res = nui_bound_12(1.0, np.eye(2), 5.0 * np.eye(2))
        assert res.components["delta_N"] == pytest.approx(0.25)
        assert res.value == pytest.approx(5.0 / 3.0)

    def test_delta_to_zero(self):
        res = nui_bound_12(2.0, np.eye(2), 1e9 * np.eye(2))
        assert res.value == pytest.approx(2.0, rel=1e-4)

    def test_half_delta(self):
        # delta = 0.5 needs det(V - G^NN) = 4 det G^NN
        res = nui_bound_12(1.3, np.eye(2), np.eye(2) + 2.0 * np.eye(2))
        assert res.components["delta_N"] == pytest.approx(0.5)
        assert res.value == pytest.approx(3.0 * 1.3)

    def test_exceeds_baseline(self, rng):
        for _ in range(50):
            g11 = rng.uniform(0.1, 4.0)
            G_NN = random_spd(rng, 2)
            # V - G^NN = G_NN + spd keeps det(slack) > det(G_NN), so delta < 1
            res = nui_bound_12(g11, G_NN, 2.0 * G_NN + random_spd(rng, 2))
            assert res.value > g11

    def test_floor_violation(self):
        with pytest.raises(NuisanceVarianceTooSmall):
            nui_bound_12(1.0, np.eye(2), np.diag([1.5, 0.5]))

    def test_delta_out_of_range(self):
        with pytest.raises(DeltaOutOfRange):
            nui_bound_12(1.0, np.eye(2), np.eye(2) + 0.5 * np.eye(2))


class TestNuiBound21:
    def test_arithmetic(self):
        res = nui_bound_21(np.eye(2), np.eye(2), 1.0, 2.0)
        assert res.components["nagaoka_interest"] == pytest.approx(4.0)
        assert res.value == pytest.approx(8.0)
        assert res.components["information_loss"] == pytest.approx(4.0)

    def test_large_nuisance_error(self):
        res = nui_bound_21(np.eye(2), np.eye(2), 1.0, 1e12)
        assert res.value == pytest.approx(4.0, abs=1e-9)

    def test_half_ratio(self):
        # g33 = V33/2 makes the loss equal the interest bound
        res = nui_bound_21(np.eye(2), np.eye(2), 3.0, 6.0)
        assert res.components["information_loss"] == pytest.approx(
            res.components["nagaoka_interest"])

    def test_floor_violation(self):
        with pytest.raises(NuisanceVarianceTooSmall):
            nui_bound_21(np.eye(2), np.eye(2), 2.0, 2.0)


class TestSplitOrthogonalBlocks:
    def test_accepts_block_diagonal(self):
        blocks = split_orthogonal_blocks(np.diag([1.0, 2.0, 3.0]), 1)
        np.testing.assert_allclose(blocks.NN, np.diag([2.0, 3.0]))

    def test_refuses_coupled(self):
        G_inv = np.eye(3)
        G_inv[0, 2] = G_inv[2, 0] = 0.01
        with pytest.raises(NotBlockDiagonal):
            split_orthogonal_blocks(G_inv, 1)


class TestClassicalWeightElimination:
    def test_block_diagonal(self):
        M = np.diag([2.0, 3.0, 4.0])
        res = classical_weight_elimination(M, np.eye(2))
        assert res.value == pytest.approx(5.0)
        np.testing.assert_allclose(res.optimal_weights["W_IN"], 0.0, atol=1e-14)

    def test_two_by_two(self):
        res = classical_weight_elimination([[2.0, 1.0], [1.0, 2.0]], [[1.0]])
        assert res.value == pytest.approx(1.5)
        assert res.optimal_weights["W_IN"][0, 0] == pytest.approx(-0.5)

    def test_grid_search_oracle(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, min(n, 3)))
            M = random_spd(rng, n)
            W_I = random_spd(rng, m)
            res = classical_weight_elimination(M, W_I)
            oracle = weight_grid_search(M, W_I)
            assert res.value == pytest.approx(oracle, abs=1e-4 * max(1.0, abs(oracle)))

    def test_inverse_fisher_input_gives_partial_bound(self, rng):
        # applied to M = J^-1 the value is Tr(W_I J_II^-1)
        for _ in range(20):
            J = random_spd(rng, 3)
            W_I = random_spd(rng, 1)
            res = classical_weight_elimination(np.linalg.inv(J), W_I)
            expected = float(np.trace(W_I @ np.linalg.inv(J[:1, :1])))
            assert res.value == pytest.approx(expected, rel=1e-10)

    def test_optimal_weights_reproduce_value_and_are_psd(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, n))
            res = classical_weight_elimination(random_spd(rng, n), random_spd(rng, m))
            W = res.optimal_weights["W_full"]
            assert np.linalg.eigvalsh((W + W.T) / 2)[0] >= -1e-9
            assert res.components["direct_evaluation"] == pytest.approx(res.value, abs=1e-8)


class TestWeightMatrix:
    def test_strict_flag(self):
        assert WeightMatrix(np.eye(2)).strict
        assert not WeightMatrix(np.diag([1.0, 0.0])).strict

    def test_rejects_indefinite(self):
        from qnuisance.errors import NonPositiveWeight
        with pytest.raises(NonPositiveWeight):
            WeightMatrix(np.diag([1.0, -1.0]))


class TestSingularNuisance:
    def test_elimination_rejects_singular_nuisance_block(self):
        from qnuisance.errors import SingularNuisanceBlock
        M = np.diag([1.0, 1.0, 0.0])
        with pytest.raises(SingularNuisanceBlock):
            classical_weight_elimination(M, np.eye(1))
