"""
Tests for the Casazza-Christensen blocks, secular solver and ladder algebra.
"""
import math

import numpy as np
import pytest

from core.deterministic.casazza_christensen import (
    CCBlock,
    CCFamily,
    cc_b_operator,
    cc_block_spectrum,
    cc_complementary,
    cc_dilation,
    cc_family_frame,
    cc_family_spectrum,
    cc_frame,
    direct_sum_hamiltonian,
    ladder_a,
    ladder_a_star,
    ladder_action_on_frame,
    ranked_family,
    secular_roots,
    sqrt_bounded_family,
    truncated_commutator_defect,
    vertical_defects,
    vertical_v,
)
from core.deterministic.frame_core import gram, parseval_defect
from core.deterministic.hamiltonian import dense_spectrum
from core.exceptions import (
    DegenerateWeightsError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    WeightOrderError,
)


class TestCCBlock:
    """Test cases for block validation."""

    def test_valid_block(self, cc2_block: CCBlock):
        """Test a well-formed block."""
        assert cc2_block.n == 2
        assert cc2_block.frame.labels == (1, 2, 3)

    def test_wrong_weight_count(self):
        """Test that a block needs n + 1 weights."""
        with pytest.raises(DimensionMismatchError):
            CCBlock(2, np.array([1.0, 2.0]))

    def test_non_increasing(self):
        """Test that weights must increase strictly."""
        with pytest.raises(WeightOrderError):
            CCBlock(2, np.array([1.0, 3.0, 3.0]))

    def test_size_must_be_positive(self):
        """Test that n >= 1."""
        with pytest.raises(ValueError):
            CCBlock(0, np.array([1.0]))


class TestCCFrame:
    """Test cases for cc_frame, cc_complementary and cc_dilation."""

    def test_vectors_for_n2(self, cc2_frame):
        """Test phi_1 = (1/2, -1/2), phi_2 = -phi_1, phi_3 = (1, 1)/sqrt2."""
        np.testing.assert_allclose(
            cc2_frame.matrix,
            [[0.5, -0.5], [-0.5, 0.5], [2**-0.5, 2**-0.5]],
            atol=1e-15,
        )

    def test_complement_last_entry_zero(self):
        """Test psi_{n+1} = 0 and psi_j = 1/sqrt(n) otherwise."""
        psi = cc_complementary(4)
        np.testing.assert_allclose(psi.matrix[:, 0], [0.5, 0.5, 0.5, 0.5, 0.0])

    @pytest.mark.parametrize("n", [1, 2, 5, 30])
    def test_dilation_is_unitary(self, n: int):
        """Test Gram(h) = I for the closed-form complement."""
        dilation = cc_dilation(n)
        np.testing.assert_allclose(gram(dilation.h), np.eye(n + 1), atol=1e-14)


class TestSecularRoots:
    """Test cases for secular_roots."""

    def test_two_weights(self):
        """Test the single root 2 between 1 and 3."""
        solution = secular_roots([1.0, 3.0])
        assert solution.roots[0] == pytest.approx(2.0, abs=1e-14)
        assert solution.interlaces()

    def test_roots_solve_equation(self, rng: np.random.Generator):
        """Test that the rescaled residual is at rounding level."""
        E = np.sort(rng.uniform(-10, 10, 12))
        solution = secular_roots(E)
        assert solution.roots.shape == (11,)
        assert solution.interlaces()
        assert np.max(solution.residuals) <= 1e-10

    def test_repeated_weights(self):
        """Test that repeated weights are rejected."""
        with pytest.raises(DegenerateWeightsError, match="degenerate weights unsupported"):
            secular_roots([1.0, 1.0, 2.0])

    def test_nearly_repeated_weights(self):
        """Test that gaps below gap_rtol * span are rejected."""
        with pytest.raises(DegenerateWeightsError):
            secular_roots([1.0, 1.0 + 1e-12, 2.0])

    def test_needs_two_weights(self):
        """Test the minimum input size."""
        with pytest.raises(ValueError):
            secular_roots([1.0])


class TestBlockSpectrum:
    """Test cases for cc_block_spectrum."""

    def test_closed_form(self, cc2_block: CCBlock):
        """Test spectrum {2 (secular), 5 (top)} for E = (1, 3, 5)."""
        report = cc_block_spectrum(cc2_block)
        np.testing.assert_allclose(report.eigenvalues, [2.0, 5.0], atol=1e-12)
        assert report.kinds == ("secular", "top")
        assert report.max_residual <= 1e-12

    def test_single_vector_block(self):
        """Test n = 1, where only the top eigenvalue remains."""
        report = cc_block_spectrum(CCBlock(1, np.array([1.0, 2.0])))
        np.testing.assert_allclose(report.eigenvalues, [2.0])
        assert report.kinds == ("top",)

    @pytest.mark.parametrize("n", [2, 3, 8, 20])
    def test_matches_dense(self, n: int, rng: np.random.Generator):
        """Test secular roots plus E_{n+1} against dense eigh."""
        block = CCBlock(n, np.sort(rng.uniform(0, 10, n + 1)))
        report = cc_block_spectrum(block)
        dense = dense_spectrum(block.hamiltonian())
        np.testing.assert_allclose(np.sort(report.eigenvalues), dense.eigenvalues, atol=1e-9)
        relative = report.residuals / np.max(np.abs(block.E))
        assert np.max(relative) <= 1e-8


class TestLadders:
    """Test cases for the truncated ladder matrices and vertical operators."""

    def test_lowering_matrix(self):
        """Test a e_j = sqrt(j-1) e_{j-1}."""
        np.testing.assert_allclose(ladder_a(3), [[0, 1, 0], [0, 0, math.sqrt(2)], [0, 0, 0]])
        np.testing.assert_allclose(ladder_a_star(3), ladder_a(3).T)

    @pytest.mark.parametrize("n", [1, 2, 10, 100])
    def test_commutator(self, n: int):
        """Test [a_n, a_n*] = I - n P_n."""
        assert truncated_commutator_defect(n) <= 1e-14

    def test_action_top_vector(self):
        """Test a_2 phi_3 = (1/sqrt2, 0)."""
        np.testing.assert_allclose(ladder_action_on_frame(2, 3).coeffs, [2**-0.5, 0.0], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 9])
    def test_action_formula(self, n: int):
        """Test the frame expression of a_n phi_j against the matrix product."""
        a, frame = ladder_a(n), cc_frame(n)
        for j in range(1, n + 2):
            np.testing.assert_allclose(ladder_action_on_frame(n, j).coeffs, a @ frame.matrix[j - 1], atol=1e-13)

    def test_action_index_range(self):
        """Test that j must lie in 1..n+1."""
        with pytest.raises(IndexOutOfRangeError):
            ladder_action_on_frame(2, 4)

    @pytest.mark.parametrize("n", [1, 2, 17, 100])
    def test_vertical_operator(self, n: int):
        """Test V V* = I_n, (V*V)^2 = V*V and rank(V*V) = n."""
        co_isometry, idempotency, rank = vertical_defects(n)
        assert co_isometry <= 1e-14
        assert idempotency <= 1e-14
        assert rank == n
        assert vertical_v(n).shape == (n, n + 1)


class TestFamilies:
    """Test cases for direct sums of blocks."""

    def test_family_order_enforced(self):
        """Test that weights must keep increasing across blocks."""
        with pytest.raises(WeightOrderError):
            CCFamily((CCBlock(1, np.array([1.0, 5.0])), CCBlock(1, np.array([4.0, 6.0]))))

    def test_family_frame_is_parseval(self):
        """Test the union frame of the first blocks of a ranked family."""
        family = ranked_family(4)
        frame = cc_family_frame(family)
        assert frame.dim == 10
        assert frame.size == 14
        assert frame.labels[:3] == ((1, 1), (1, 2), (2, 1))
        assert parseval_defect(frame) <= 1e-14

    def test_family_spectrum_matches_dense(self):
        """Test the merged block spectra against the direct-sum Hamiltonian."""
        family = ranked_family(5)
        report = cc_family_spectrum(family)
        dense = dense_spectrum(direct_sum_hamiltonian(family))
        np.testing.assert_allclose(report.eigenvalues, dense.eigenvalues, atol=1e-9)
        assert report.kinds.count("top") == 5
        assert sorted(set(report.blocks)) == [1, 2, 3, 4, 5]

    def test_truncation(self):
        """Test N_blocks truncation and its range."""
        family = ranked_family(3)
        assert family.truncated(2).dim == 3
        with pytest.raises(IndexOutOfRangeError):
            family.truncated(5)

    def test_ranked_b_norm_grows(self):
        """Test ||B|| = sqrt((N^2 - 1)/12) for consecutive rank weights."""
        for N in (2, 5, 8):
            report = cc_b_operator(ranked_family(N))
            assert report.norm == pytest.approx(math.sqrt((N**2 - 1) / 12), rel=1e-10)

    def test_sqrt_bounded_family(self):
        """Test E_j/sqrt(n) <= 1.25 and a bounded B."""
        report = cc_b_operator(sqrt_bounded_family(40))
        assert report.sup_ratio <= 1.25
        assert report.norm <= 0.25
