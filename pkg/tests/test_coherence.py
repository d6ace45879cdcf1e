import json

import numpy as np
import pytest

from blocksense import (
    BlockGram,
    BlockStructure,
    EquivalentDictionary,
    block_recovery_bound,
    coherence_report,
    decomposition_check,
    deviation,
    idealized,
    inter_block_coherence,
    mutual_coherence,
    normalization_penalty,
    objective_gradient,
    sparse_recovery_bound,
    sub_block_coherence,
    total_inter_block_coherence,
    total_sub_block_coherence,
    weighted_objective,
)
from helpers import numerical_gradient, random_dictionary, unit_columns


def random_gram(rng, sizes, m=None):
    structure = BlockStructure(sizes)
    k = structure.num_columns
    m = m or max(2, k // 2)
    e = rng.standard_normal((m, k))
    g = e.T @ e
    return BlockGram((g + g.T) / 2, structure)


class TestMutualCoherence:
    def test_orthogonal_columns(self):
        assert mutual_coherence(np.eye(4)) == 0.0

    def test_identical_columns(self):
        col = np.array([1.0, 2.0, 3.0])
        assert mutual_coherence(np.column_stack([col, col])) == pytest.approx(1.0)

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(0)
        e = rng.standard_normal((5, 8))
        best = 0.0
        for i in range(8):
            for j in range(8):
                if i == j:
                    continue
                num = abs(e[:, i] @ e[:, j])
                den = np.linalg.norm(e[:, i]) * np.linalg.norm(e[:, j])
                best = max(best, num / den)
        assert mutual_coherence(e) == pytest.approx(best, rel=1e-12)

    def test_zero_column_raises(self):
        e = np.eye(3)
        e[:, 1] = 0.0
        with pytest.raises(ValueError, match="zero column"):
            mutual_coherence(e)


class TestInterBlockCoherence:
    def test_block_diagonal_is_zero(self):
        g = BlockGram(np.eye(6), BlockStructure((3, 3)))
        assert inter_block_coherence(g) == 0.0

    def test_scaled_identity_cross_block(self):
        mat = np.eye(4)
        mat[0:2, 2:4] = 0.3 * np.eye(2)
        mat[2:4, 0:2] = 0.3 * np.eye(2)
        g = BlockGram(mat, BlockStructure((2, 2)))
        assert inter_block_coherence(g) == pytest.approx(0.3 / 2)

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(1)
        g = random_gram(rng, (3, 3, 3, 3))
        best = 0.0
        for i in range(4):
            for j in range(4):
                if i == j:
                    continue
                blk = g.matrix[3 * i : 3 * i + 3, 3 * j : 3 * j + 3]
                best = max(best, np.linalg.svd(blk, compute_uv=False)[0] / 3)
        assert inter_block_coherence(g) == pytest.approx(best, rel=1e-12)

    def test_mixed_sizes_refused(self):
        g = random_gram(np.random.default_rng(2), (2, 3))
        with pytest.raises(ValueError, match="equal block sizes"):
            inter_block_coherence(g)

    def test_single_block_refused(self):
        g = random_gram(np.random.default_rng(3), (4,))
        with pytest.raises(ValueError, match="two blocks"):
            inter_block_coherence(g)


class TestSubBlockCoherence:
    def test_orthonormal_blocks(self):
        g = BlockGram(np.eye(6), BlockStructure((3, 3)))
        assert sub_block_coherence(g) == 0.0

    def test_unit_blocks_are_degenerate(self):
        g = random_gram(np.random.default_rng(4), (1, 1, 1, 1))
        assert sub_block_coherence(g) == 0.0

    def test_matches_scan_oracle(self):
        rng = np.random.default_rng(5)
        g = random_gram(rng, (2, 4, 3))
        best = 0.0
        for j, (lo, hi) in enumerate(zip(g.structure.offsets[:-1], g.structure.offsets[1:])):
            for m in range(lo, hi):
                for n in range(lo, hi):
                    if m != n:
                        best = max(best, abs(g.matrix[m, n]))
        assert sub_block_coherence(g) == pytest.approx(best, rel=1e-12)


class TestTotals:
    def test_block_diagonal_total_inter_zero(self):
        g = BlockGram(np.eye(6), BlockStructure((2, 2, 2)))
        assert total_inter_block_coherence(g) == 0.0

    def test_total_inter_worked_example(self):
        # blocks (2, 2); cross block entries 0.2, 0.1, 0.3, 0.4 mirrored
        mat = np.eye(4)
        mat[0:2, 2:4] = [[0.2, 0.1], [0.3, 0.4]]
        mat[2:4, 0:2] = mat[0:2, 2:4].T
        g = BlockGram(mat, BlockStructure((2, 2)), validate=False)
        assert total_inter_block_coherence(g) == pytest.approx(0.60, abs=1e-12)

    def test_total_inter_block_permutation_invariant(self):
        rng = np.random.default_rng(6)
        sizes = (2, 3, 2)
        g = random_gram(rng, sizes)
        # relabel blocks in order (2, 0, 1)
        order = [2, 0, 1]
        cols = np.concatenate([np.arange(*g.structure.offsets[[j, j + 1]]) for j in order])
        permuted = BlockGram(
            g.matrix[np.ix_(cols, cols)], BlockStructure(tuple(sizes[j] for j in order))
        )
        assert total_inter_block_coherence(permuted) == pytest.approx(
            total_inter_block_coherence(g), rel=1e-12
        )
        assert total_sub_block_coherence(permuted) == pytest.approx(
            total_sub_block_coherence(g), rel=1e-12
        )
        assert normalization_penalty(permuted) == pytest.approx(
            normalization_penalty(g), rel=1e-12
        )

    def test_total_sub_identity_zero(self):
        assert total_sub_block_coherence(BlockGram(np.eye(4), BlockStructure((2, 2)))) == 0.0

    def test_total_sub_worked_example(self):
        # within-block off-diagonals 0.5 and 0.6
        mat = np.eye(4)
        mat[0, 1] = mat[1, 0] = 0.5
        mat[2, 3] = mat[3, 2] = 0.6
        g = BlockGram(mat, BlockStructure((2, 2)), validate=False)
        assert total_sub_block_coherence(g) == pytest.approx(1.22, abs=1e-12)

    def test_total_sub_unit_blocks_zero(self):
        g = random_gram(np.random.default_rng(7), (1,) * 5)
        assert total_sub_block_coherence(g) == 0.0

    def test_norm_penalty_examples(self):
        assert normalization_penalty(BlockGram(np.eye(5), BlockStructure((5,)))) == 0.0
        g = BlockGram(2 * np.eye(5), BlockStructure((5,)))
        assert normalization_penalty(g) == pytest.approx(5.0, abs=1e-12)

    def test_norm_penalty_matches_scan(self):
        g = random_gram(np.random.default_rng(8), (3, 2))
        expected = sum((g.matrix[m, m] - 1.0) ** 2 for m in range(5))
        assert normalization_penalty(g) == pytest.approx(expected, rel=1e-12)


class TestWeightedObjective:
    def test_identity_is_zero(self):
        g = BlockGram(np.eye(6), BlockStructure((3, 3)))
        for alpha in (0.1, 0.5, 0.9):
            assert weighted_objective(g, alpha) == 0.0

    def test_half_alpha_is_half_gram_mismatch(self):
        g = random_gram(np.random.default_rng(9), (2, 3, 1))
        expected = 0.5 * np.sum((g.matrix - np.eye(6)) ** 2)
        assert weighted_objective(g, 0.5) == pytest.approx(expected, rel=1e-12)

    def test_composition_of_totals(self):
        g = random_gram(np.random.default_rng(10), (3, 3))
        expected = (
            0.5 * normalization_penalty(g)
            + 0.7 * total_inter_block_coherence(g)
            + 0.3 * total_sub_block_coherence(g)
        )
        assert weighted_objective(g, 0.3) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_alpha_out_of_range(self, alpha):
        g = BlockGram(np.eye(4), BlockStructure((2, 2)))
        with pytest.raises(ValueError):
            weighted_objective(g, alpha)


class TestDecompositionCheck:
    def test_orthonormal_columns_both_zero(self):
        e = EquivalentDictionary(np.eye(4), BlockStructure((2, 2)))
        lhs, rhs = decomposition_check(e)
        assert lhs == 0.0 and rhs == 0.0

    def test_random_equality(self):
        rng = np.random.default_rng(11)
        e = EquivalentDictionary(rng.standard_normal((6, 12)), BlockStructure((3, 3, 3, 3)))
        lhs, rhs = decomposition_check(e)
        assert abs(lhs - rhs) <= 1e-9 * (1 + lhs)

    def test_sides_computed_independently(self):
        rng = np.random.default_rng(12)
        e_mat = rng.standard_normal((5, 9))
        e = EquivalentDictionary(e_mat, BlockStructure((2, 3, 4)))
        lhs, rhs = decomposition_check(e)
        oracle = np.sum((e_mat.T @ e_mat - np.eye(9)) ** 2)
        assert lhs == pytest.approx(oracle, rel=1e-12)
        assert rhs == pytest.approx(oracle, rel=1e-9)


class TestBounds:
    def test_sparse_bound_values(self):
        assert sparse_recovery_bound(1.0) == pytest.approx(1.0)
        assert sparse_recovery_bound(1.0 / 3.0) == pytest.approx(2.0)
        assert sparse_recovery_bound(0.2) == pytest.approx(3.0)

    def test_sparse_bound_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            sparse_recovery_bound(0.0)

    def test_block_bound_reduces_to_sparse_at_unit_size(self):
        rng = np.random.default_rng(13)
        for mu in rng.uniform(0.01, 1.0, size=20):
            assert block_recovery_bound(mu, 0.37, 1) == pytest.approx(
                sparse_recovery_bound(mu), abs=1e-12
            )

    def test_block_bound_worked_example(self):
        assert block_recovery_bound(0.25, 0.0, 2) == pytest.approx(1.5)

    def test_block_bound_matches_formula(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            mu_b = rng.uniform(0.05, 0.9)
            nu = rng.uniform(0.0, 0.5)
            s = int(rng.integers(1, 6))
            expected = (1.0 / (2 * s)) * (1.0 / mu_b + s - (s - 1) * nu / mu_b)
            assert block_recovery_bound(mu_b, nu, s) == pytest.approx(expected, rel=1e-12)

    def test_block_bound_rejects_nonpositive_mu(self):
        with pytest.raises(ValueError):
            block_recovery_bound(0.0, 0.1, 3)


class TestMasks:
    def test_identity_has_zero_deviations(self):
        g = BlockGram(np.eye(6), BlockStructure((3, 3)))
        for kind in ("norm", "inter", "sub"):
            assert np.all(deviation(g, kind) == 0.0)
            np.testing.assert_array_equal(idealized(g, kind), np.eye(6))

    def test_objective_from_masks(self):
        g = random_gram(np.random.default_rng(15), (2, 3, 2))
        alpha = 0.35
        from_masks = (
            0.5 * np.sum(deviation(g, "norm") ** 2)
            + (1 - alpha) * np.sum(deviation(g, "inter") ** 2)
            + alpha * np.sum(deviation(g, "sub") ** 2)
        )
        assert weighted_objective(g, alpha) == pytest.approx(from_masks, rel=1e-12)

    def test_supports_disjoint_and_tile(self):
        g = random_gram(np.random.default_rng(16), (2, 1, 3))
        supports = [deviation(g, kind) != 0 for kind in ("norm", "inter", "sub")]
        overlap = supports[0] & supports[1] | supports[0] & supports[2] | supports[1] & supports[2]
        assert not overlap.any()
        # deviations sum to G - I
        total = sum(deviation(g, kind) for kind in ("norm", "inter", "sub"))
        np.testing.assert_allclose(total, g.matrix - np.eye(6), atol=1e-14)

    def test_deviation_complements_idealized(self):
        g = random_gram(np.random.default_rng(17), (3, 2))
        for kind in ("norm", "inter", "sub"):
            np.testing.assert_allclose(
                g.matrix - idealized(g, kind), deviation(g, kind), atol=1e-14
            )

    def test_idealized_preserves_symmetry(self):
        g = random_gram(np.random.default_rng(18), (2, 2, 2))
        for kind in ("norm", "inter", "sub"):
            h = idealized(g, kind)
            np.testing.assert_allclose(h, h.T, atol=1e-14)

    def test_sub_masks_vanish_for_unit_blocks(self):
        g = random_gram(np.random.default_rng(19), (1, 1, 1))
        assert np.all(deviation(g, "sub") == 0.0)
        np.testing.assert_array_equal(idealized(g, "sub"), g.matrix)

    def test_unknown_kind(self):
        g = random_gram(np.random.default_rng(20), (2, 2))
        with pytest.raises(ValueError, match="kind"):
            deviation(g, "bogus")


class TestObjectiveGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(21)
        structure = BlockStructure((2, 3, 1))
        g_mat = rng.standard_normal((6, 6))
        g_mat = (g_mat + g_mat.T) / 2
        alpha = 0.3
        grad = objective_gradient(BlockGram(g_mat, structure, validate=False), alpha)
        fd = numerical_gradient(
            lambda m: weighted_objective(BlockGram(m, structure, validate=False), alpha), g_mat
        )
        np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-8)


class TestCoherenceReport:
    def test_json_field_names(self):
        rng = np.random.default_rng(22)
        d = random_dictionary(rng, 6, (3, 3, 3))
        e = EquivalentDictionary(rng.standard_normal((4, 9)), d.structure)
        report = coherence_report(e, alpha=0.7)
        payload = json.loads(json.dumps(report.to_json()))
        assert set(payload) == {
            "mu",
            "mu_block",
            "nu_sub",
            "total_inter",
            "total_sub",
            "norm_penalty",
        }
        assert report.objective_alpha == pytest.approx(
            0.5 * report.norm_penalty + 0.3 * report.total_inter + 0.7 * report.total_sub,
            rel=1e-12,
        )

    def test_mixed_sizes_mu_block_is_none(self):
        rng = np.random.default_rng(23)
        e = EquivalentDictionary(rng.standard_normal((4, 7)), BlockStructure((3, 4)))
        report = coherence_report(e)
        assert report.mu_block is None
        assert report.objective_alpha is None

    def test_unit_block_sizes_have_zero_total_sub(self):
        rng = np.random.default_rng(24)
        e = EquivalentDictionary(
            unit_columns(rng.standard_normal((4, 6))), BlockStructure((1,) * 6)
        )
        report = coherence_report(e)
        assert report.total_sub == 0.0
        assert report.mu <= 1.0
