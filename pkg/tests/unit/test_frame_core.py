"""
Tests for the Parseval frame core.
"""
import numpy as np
import pytest

from core.deterministic.casazza_christensen import cc_frame
from core.deterministic.frame_core import (
    Branch,
    Frame,
    Vector,
    analysis,
    check_projector,
    excess,
    frame_operator,
    frame_rank,
    gram,
    hermitian_power,
    naimark_dilate,
    parseval_defect,
    project_onb,
    random_parseval_frame,
    random_projector,
    range_projector,
    require_parseval,
    riesz_pair_families,
    synthesis,
    unitarily_equivalent,
)
from core.exceptions import (
    DimensionMismatchError,
    IncompleteFamilyError,
    InvariantViolationError,
    MixedBranchError,
    NotParsevalError,
    NotPositiveDefiniteError,
    NotProjectorError,
    SingularMatrixError,
)


class TestFrame:
    """Test cases for the Frame container."""

    def test_default_labels(self, onb3: Frame):
        """Test that labels default to 0..J-1."""
        assert onb3.labels == (0, 1, 2)
        assert onb3.size == 3
        assert onb3.dim == 3

    def test_duplicate_labels_rejected(self):
        """Test that labels must be unique."""
        with pytest.raises(ValueError, match="unique"):
            Frame(np.eye(2), ("a", "a"))

    def test_label_count_must_match(self):
        """Test that a label per vector is required."""
        with pytest.raises(DimensionMismatchError):
            Frame(np.eye(2), ("a",))

    def test_subset_and_position(self, cc2_frame: Frame):
        """Test addressing members by label."""
        assert cc2_frame.labels == (1, 2, 3)
        assert cc2_frame.position(3) == 2
        sub = cc2_frame.subset([3, 1])
        assert sub.labels == (3, 1)
        np.testing.assert_allclose(sub.matrix[0], cc2_frame.matrix[2])

    def test_matrix_is_read_only(self, onb3: Frame):
        """Test that frame vectors cannot be mutated in place."""
        with pytest.raises(ValueError):
            onb3.matrix[0, 0] = 2.0

    def test_from_vectors_dimension_check(self):
        """Test that vectors of different dimension are rejected."""
        with pytest.raises(DimensionMismatchError):
            Frame.from_vectors([Vector(np.ones(2)), Vector(np.ones(3))])


class TestParsevalDefect:
    """Test cases for parseval_defect and require_parseval."""

    def test_onb_has_zero_defect(self, onb3: Frame):
        """Test that an orthonormal basis is Parseval."""
        assert parseval_defect(onb3) == 0.0

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 25, 100])
    def test_cc_frames_are_parseval(self, n: int):
        """Test the CC block frames to machine precision."""
        assert parseval_defect(cc_frame(n)) <= 1e-14

    def test_scaled_basis_rejected(self):
        """Test that 2 * ONB has defect 3 and fails the precondition."""
        frame = Frame(2 * np.eye(2))
        assert parseval_defect(frame) == pytest.approx(3.0)
        with pytest.raises(NotParsevalError):
            require_parseval(frame)

    def test_frame_operator_is_identity(self, random_pf: Frame):
        """Test S = I for a random projected-ONB frame."""
        np.testing.assert_allclose(frame_operator(random_pf), np.eye(4), atol=1e-12)


class TestAnalysisSynthesis:
    """Test cases for analysis and synthesis."""

    def test_reconstruction(self, random_pf: Frame, rng: np.random.Generator):
        """Test that synthesis(analysis(f)) = f for a Parseval frame."""
        f = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        recovered = synthesis(random_pf, analysis(random_pf, f))
        np.testing.assert_allclose(recovered.coeffs, f, atol=1e-12)

    def test_isometry(self, random_pf: Frame, rng: np.random.Generator):
        """Test sum |<phi_j, f>|^2 = ||f||^2."""
        f = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        coefficients = analysis(random_pf, f)
        assert np.sum(np.abs(coefficients) ** 2) == pytest.approx(np.linalg.norm(f) ** 2, rel=1e-12)

    def test_conjugate_linear_first_slot(self):
        """Test that analysis coefficients are <phi_j, f> with phi_j conjugated."""
        frame = Frame(np.array([[1j, 0.0], [0.0, 1.0]]))
        coefficients = analysis(frame, np.array([1.0, 0.0]))
        assert coefficients[0] == pytest.approx(-1j)

    def test_dimension_mismatch(self, onb3: Frame):
        """Test that a vector of the wrong dimension is rejected."""
        with pytest.raises(DimensionMismatchError):
            analysis(onb3, np.ones(2))
        with pytest.raises(DimensionMismatchError):
            synthesis(onb3, np.ones(4))

    def test_kernel_of_synthesis(self, cc2_frame: Frame):
        """Test that sequences orthogonal to the analysis range synthesise to zero."""
        P = range_projector(cc2_frame)
        c = (np.eye(3) - P) @ np.array([1.0, -2.0, 0.5])
        assert np.linalg.norm(c) > 0.1
        assert synthesis(cc2_frame, c).norm() <= 1e-14


class TestExcess:
    """Test cases for frame_rank and excess."""

    @pytest.mark.parametrize("n", range(1, 21))
    def test_cc_block_excess_is_one(self, n: int):
        """Test that every CC block has excess 1."""
        assert excess(cc_frame(n)) == 1

    def test_onb_excess_is_zero(self, onb3: Frame):
        """Test that an ONB has no removable vectors."""
        assert excess(onb3) == 0

    def test_incomplete_family(self):
        """Test that a family spanning less than C^d is reported."""
        frame = Frame(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
        assert frame_rank(frame) == 2
        with pytest.raises(IncompleteFamilyError, match="incomplete family"):
            excess(frame)


class TestRangeProjector:
    """Test cases for range_projector."""

    def test_projector_properties(self, random_pf: Frame):
        """Test that Theta Theta* is an orthogonal projector of rank d."""
        P = range_projector(random_pf)
        check_projector(P)
        assert np.trace(P).real == pytest.approx(4.0, abs=1e-10)

    def test_requires_parseval(self):
        """Test that the projector is only defined for Parseval frames."""
        with pytest.raises(NotParsevalError):
            range_projector(Frame(2 * np.eye(2)))


class TestNaimarkDilate:
    """Test cases for naimark_dilate."""

    @pytest.mark.slow
    def test_random_frames(self, rng: np.random.Generator):
        """Test Gram(h) = I on 50 random projected-ONB frames (d <= 20, excess <= 8)."""
        for _ in range(50):
            d = int(rng.integers(1, 21))
            extra = int(rng.integers(0, 9))
            frame = random_parseval_frame(d, d + extra, rng)
            dilation = naimark_dilate(frame, rng)
            assert dilation.m == extra == excess(frame)
            np.testing.assert_allclose(gram(dilation.h), np.eye(d + extra), atol=1e-12)
            np.testing.assert_array_equal(dilation.h.matrix[:, :d], frame.matrix)
            if extra:
                assert parseval_defect(dilation.psi) <= 1e-10

    def test_cc_complement(self, cc2_frame: Frame):
        """Test that a CC block dilates into one extra dimension."""
        dilation = naimark_dilate(cc2_frame, np.random.default_rng(0))
        assert dilation.m == 1
        assert dilation.psi.dim == 1
        np.testing.assert_allclose(np.abs(dilation.psi.matrix[:, 0]), [2**-0.5, 2**-0.5, 0.0], atol=1e-12)

    def test_onb_needs_no_complement(self, onb3: Frame):
        """Test that m = 0 for an orthonormal basis."""
        dilation = naimark_dilate(onb3)
        assert dilation.m == 0
        np.testing.assert_array_equal(dilation.h.matrix, onb3.matrix)

    def test_unique_up_to_unitary(self, random_pf: Frame):
        """Test that two completions give unitarily equivalent complementary families."""
        first = naimark_dilate(random_pf, np.random.default_rng(1))
        second = naimark_dilate(random_pf, np.random.default_rng(2))
        assert unitarily_equivalent(first.psi, second.psi, tol=1e-10)

    def test_rejects_non_parseval(self):
        """Test the Parseval precondition."""
        with pytest.raises(NotParsevalError):
            naimark_dilate(Frame(2 * np.eye(2)))

    def test_rejects_broken_completion(self, random_pf: Frame, monkeypatch):
        """Test that a completion whose Gram misses the identity is refused."""
        monkeypatch.setattr(np.linalg, "qr", lambda Z: (Z, None))
        with pytest.raises(InvariantViolationError, match="dilation_gram_identity"):
            naimark_dilate(random_pf, np.random.default_rng(0))


class TestProjectOnb:
    """Test cases for random_projector and project_onb."""

    def test_projected_basis_is_parseval(self, rng: np.random.Generator):
        """Test that {P e_n} is a Parseval frame of range(P)."""
        P = random_projector(6, 3, rng)
        frame = project_onb(6, P)
        assert frame.size == 6
        assert frame.dim == 3
        assert parseval_defect(frame) <= 1e-12

    def test_gram_equals_projector(self, rng: np.random.Generator):
        """Test that the Gram matrix of {P e_n} is P itself."""
        P = random_projector(5, 2, rng)
        frame = project_onb(None, P)
        np.testing.assert_allclose(gram(frame), P, atol=1e-12)

    def test_rejects_non_projector(self):
        """Test that a non-idempotent matrix is rejected."""
        with pytest.raises(NotProjectorError):
            project_onb(2, np.diag([1.0, 0.5]))

    def test_rejects_wrong_dimension(self, rng: np.random.Generator):
        """Test that the projector must act on C^dim."""
        with pytest.raises(DimensionMismatchError):
            project_onb(4, random_projector(5, 2, rng))


class TestUnitarilyEquivalent:
    """Test cases for unitarily_equivalent."""

    def test_rotated_frame(self, random_pf: Frame, rng: np.random.Generator):
        """Test that U phi_j is equivalent to phi_j."""
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        rotated = Frame(random_pf.matrix @ Q.T)
        assert unitarily_equivalent(random_pf, rotated)

    def test_different_frames(self, cc2_frame: Frame):
        """Test that frames with different Gram matrices are not equivalent."""
        other = Frame(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
        assert not unitarily_equivalent(cc2_frame, other)


class TestHermitianPower:
    """Test cases for hermitian_power."""

    def test_square_root(self, rng: np.random.Generator):
        """Test (A^(1/2))^2 = A for positive definite A."""
        Z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        A = Z @ Z.conj().T + np.eye(4)
        root = hermitian_power(A, 0.5)
        np.testing.assert_allclose(root @ root, A, atol=1e-10)

    def test_singular_rejected(self):
        """Test that a singular matrix has no inverse root."""
        with pytest.raises(NotPositiveDefiniteError):
            hermitian_power(np.diag([1.0, 0.0]), -0.5)

    def test_pseudo_inverse_root(self):
        """Test pseudo-inverse semantics below the floor."""
        result = hermitian_power(np.diag([4.0, 0.0]), -0.5, pseudo=True)
        np.testing.assert_allclose(result, np.diag([0.5, 0.0]))


class TestRieszPairFamilies:
    """Test cases for riesz_pair_families."""

    @pytest.mark.parametrize(
        "X, branch",
        [(0.5 * np.eye(3), Branch.CONTRACTIVE), (2.0 * np.eye(3), Branch.EXPANSIVE)],
    )
    def test_scaled_identity(self, X: np.ndarray, branch: Branch):
        """Test both branches on multiples of the identity."""
        families = riesz_pair_families(X)
        assert families.branch is branch
        assert parseval_defect(families.union) <= 1e-12
        assert max(families.biorthogonality_defects()) <= 1e-12

    def test_random_contraction(self, rng: np.random.Generator):
        """Test a random X with ||X|| = 0.9."""
        G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        X = 0.9 * G / np.linalg.norm(G, 2)
        families = riesz_pair_families(X)
        assert families.branch is Branch.CONTRACTIVE
        assert parseval_defect(families.union) <= 1e-10
        assert max(families.biorthogonality_defects()) <= 1e-10

    def test_random_expansion(self, rng: np.random.Generator):
        """Test a random X whose smallest singular value is 1.5."""
        G = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        X = 1.5 * G / np.linalg.svd(G, compute_uv=False)[-1]
        families = riesz_pair_families(X)
        assert families.branch is Branch.EXPANSIVE
        assert parseval_defect(families.union) <= 1e-10

    def test_mixed_branch(self):
        """Test that a spectrum of X*X straddling 1 is rejected."""
        with pytest.raises(MixedBranchError, match="mixed branch unsupported"):
            riesz_pair_families(np.diag([0.5, 2.0]))

    def test_singular(self):
        """Test that a singular X is rejected."""
        with pytest.raises(SingularMatrixError):
            riesz_pair_families(np.diag([0.5, 0.0]))
