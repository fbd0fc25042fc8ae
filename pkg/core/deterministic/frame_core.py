"""
Parseval Frame Core
Finite-dimensional frames: frame operator, analysis/synthesis, excess,
Naimark dilation, projected bases and the two-branch Riesz families built
from an invertible operator X.

Inner products are conjugate-linear in the first slot. A frame is stored as a
J x d matrix whose row j holds the coordinates of phi_j, so the analysis
matrix (entries <phi_j, e_i>) is the elementwise conjugate of that matrix.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from config.settings import settings
from core.exceptions import (
    DimensionMismatchError,
    IncompleteFamilyError,
    IndexOutOfRangeError,
    InvariantViolationError,
    MixedBranchError,
    NotParsevalError,
    NotPositiveDefiniteError,
    NotProjectorError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[complex]]


def _readonly(array: ArrayLike, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Vector:
    """A vector of K given by its coefficients in the reference ONB."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 1:
            raise ValueError(f"Vector coefficients must be one-dimensional, got shape {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("Vector coefficients must be finite")
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    @property
    def dim(self) -> int:
        return int(self.coeffs.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    @classmethod
    def basis(cls, dim: int, k: int) -> "Vector":
        """The k-th reference basis vector (0-based) of C^dim."""
        coeffs = np.zeros(dim, dtype=complex)
        coeffs[k] = 1.0
        return cls(coeffs)


def as_coeffs(f: Union[Vector, ArrayLike]) -> np.ndarray:
    """Coefficient array of a Vector or anything array-like."""
    if isinstance(f, Vector):
        return f.coeffs
    return np.asarray(f, dtype=complex)


@dataclass(frozen=True, eq=False)
class Frame:
    """
    Ordered family {phi_j} of J vectors in C^d.

    Labels address members (e.g. 1..n+1 for the blocks of the CC construction);
    they default to 0..J-1. The matrix is read-only after construction.
    """

    matrix: np.ndarray
    labels: Tuple[Hashable, ...] = ()

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2:
            raise ValueError(f"Frame matrix must be 2-D (J x d), got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("Frame vectors must be finite")
        labels = tuple(self.labels) if len(self.labels) else tuple(range(matrix.shape[0]))
        if len(labels) != matrix.shape[0]:
            raise DimensionMismatchError(matrix.shape[0], len(labels), what="frame labels")
        if len(set(labels)) != len(labels):
            raise ValueError("Frame labels must be unique")
        object.__setattr__(self, "matrix", _readonly(matrix))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_vectors(
        cls,
        vectors: Iterable[Union[Vector, ArrayLike]],
        labels: Optional[Sequence[Hashable]] = None,
    ) -> "Frame":
        rows = [as_coeffs(v) for v in vectors]
        if not rows:
            raise ValueError("A frame needs at least one vector")
        dim = rows[0].shape[0]
        for row in rows[1:]:
            if row.shape[0] != dim:
                raise DimensionMismatchError(dim, row.shape[0])
        return cls(np.vstack(rows), tuple(labels) if labels is not None else ())

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return self.size

    @property
    def vectors(self) -> List[Vector]:
        return [Vector(row) for row in self.matrix]

    @property
    def analysis_matrix(self) -> np.ndarray:
        """J x d matrix Theta with Theta @ f = (<phi_j, f>)_j."""
        return self.matrix.conj()

    @property
    def synthesis_matrix(self) -> np.ndarray:
        """d x J matrix whose columns are the frame vectors."""
        return self.matrix.T

    def position(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise IndexOutOfRangeError(label, f"labels {self.labels[0]!r}..{self.labels[-1]!r}") from None

    def vector(self, label: Hashable) -> Vector:
        return Vector(self.matrix[self.position(label)])

    def subset(self, labels: Iterable[Hashable]) -> "Frame":
        labels = tuple(labels)
        rows = [self.position(label) for label in labels]
        return Frame(self.matrix[rows].reshape(len(rows), self.dim), labels)


@dataclass(frozen=True, eq=False)
class DilationResult:
    """Complementary family psi in M = C^m and the orthonormal dilation h_j = phi_j + psi_j."""

    phi: Frame
    psi: Frame
    h: Frame
    m: int


class Branch(str, Enum):
    CONTRACTIVE = "contractive"
    EXPANSIVE = "expansive"


@dataclass(frozen=True, eq=False)
class RieszPairFamilies:
    """
    Two biorthogonal pairs built from an invertible X.

    Contractive branch (||X*X|| < 1):
        riesz = {X* e_n}, riesz_dual = {X^-1 e_n},
        complement = {(I - X*X)^(1/2) e_n}, complement_dual = {(I - X*X)^(-1/2) e_n}.
    Expansive branch (X*X > 1):
        riesz = {X^-1 e_n}, riesz_dual = {X* e_n},
        complement = {(I - (X*X)^-1)^(1/2) e_n}, complement_dual = {(I - (X*X)^-1)^(-1/2) e_n}.
    In both branches riesz + complement is a Parseval frame of K.
    """

    branch: Branch
    X: np.ndarray
    riesz: Frame
    riesz_dual: Frame
    complement: Frame
    complement_dual: Frame

    @property
    def union(self) -> Frame:
        labels = [("riesz", label) for label in self.riesz.labels]
        labels += [("complement", label) for label in self.complement.labels]
        return Frame(np.vstack([self.riesz.matrix, self.complement.matrix]), tuple(labels))

    def biorthogonality_defects(self) -> Tuple[float, float]:
        """max |<a_m, b_n> - delta_mn| for both pairs."""
        eye = np.eye(self.riesz.size)
        first = cross_gram(self.riesz, self.riesz_dual) - eye
        second = cross_gram(self.complement, self.complement_dual) - eye
        return float(np.max(np.abs(first))), float(np.max(np.abs(second)))


# ---------------------------------------------------------------------------
# Frame operator and its companions
# ---------------------------------------------------------------------------


def frame_operator(frame: Frame) -> np.ndarray:
    """S = sum_j phi_j phi_j*."""
    return frame.matrix.T @ frame.matrix.conj()


def gram(frame: Frame) -> np.ndarray:
    """J x J matrix with entries <phi_j, phi_k>."""
    return frame.matrix.conj() @ frame.matrix.T


def cross_gram(left: Frame, right: Frame) -> np.ndarray:
    """Matrix with entries <left_j, right_k>."""
    if left.dim != right.dim:
        raise DimensionMismatchError(left.dim, right.dim, what="frame")
    return left.matrix.conj() @ right.matrix.T


def parseval_defect(frame: Frame) -> float:
    """Spectral norm of S - I; zero exactly when the frame is Parseval."""
    if frame.size == 0:
        raise ValueError("parseval_defect needs a nonempty frame")
    S = frame_operator(frame)
    return float(np.linalg.norm(S - np.eye(frame.dim), 2)) if frame.dim else 0.0


def require_parseval(frame: Frame, tol: Optional[float] = None) -> float:
    tol = settings.parseval_tol if tol is None else tol
    defect = parseval_defect(frame)
    if defect > tol:
        raise NotParsevalError(defect, tol)
    return defect


def analysis(frame: Frame, f: Union[Vector, ArrayLike]) -> np.ndarray:
    """Coefficients (<phi_j, f>)_j."""
    coeffs = as_coeffs(f)
    if coeffs.shape[0] != frame.dim:
        raise DimensionMismatchError(frame.dim, coeffs.shape[0])
    return frame.analysis_matrix @ coeffs


def synthesis(frame: Frame, c: ArrayLike) -> Vector:
    """sum_j c_j phi_j."""
    c = np.asarray(c, dtype=complex)
    if c.shape[0] != frame.size:
        raise DimensionMismatchError(frame.size, c.shape[0], what="coefficient sequence")
    return Vector(frame.synthesis_matrix @ c)


def frame_rank(frame: Frame, rtol: Optional[float] = None) -> int:
    rtol = settings.rank_rtol if rtol is None else rtol
    if frame.dim == 0 or frame.size == 0:
        return 0
    sigma = linalg.svdvals(frame.matrix)
    if sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > rtol * sigma[0]))


def excess(frame: Frame, rtol: Optional[float] = None) -> int:
    """J - rank, i.e. the number of vectors removable while keeping completeness."""
    rank = frame_rank(frame, rtol)
    if rank < frame.dim:
        raise IncompleteFamilyError(rank, frame.dim)
    return frame.size - rank


def range_projector(frame: Frame, tol: Optional[float] = None) -> np.ndarray:
    """Orthogonal projector Theta Theta* of l2(J) onto the range of the analysis operator."""
    require_parseval(frame, tol)
    theta = frame.analysis_matrix
    P = theta @ theta.conj().T
    return (P + P.conj().T) / 2


def unitarily_equivalent(a: Frame, b: Frame, tol: float = 1e-10) -> bool:
    """Two families are unitarily equivalent iff their Gram matrices agree."""
    if a.size != b.size:
        return False
    return bool(np.max(np.abs(gram(a) - gram(b)), initial=0.0) <= tol)


# ---------------------------------------------------------------------------
# Dilation and projected bases
# ---------------------------------------------------------------------------


def naimark_dilate(
    frame: Frame,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
    gram_tol: Optional[float] = None,
) -> DilationResult:
    """
    Complete the orthonormal columns of the analysis matrix to a unitary.

    Random Gaussian columns are projected off the existing columns and
    orthonormalised, twice. Row j of the added block (conjugated) gives psi_j,
    so h_j = phi_j + psi_j has Gram(h) = I. The result is unique only up to a
    unitary on M.

    Args:
        frame: A Parseval frame of C^d
        rng: Generator for the completion (defaults to the configured seed)
        tol: Parseval tolerance for the precondition
        gram_tol: Tolerance on max |Gram(h) - I|, widened by twice the input Parseval defect

    Returns:
        DilationResult with m = J - d

    Raises:
        NotParsevalError: If the frame is not Parseval
        InvariantViolationError: If Gram(h) misses the identity
    """
    gram_tol = settings.gram_tol if gram_tol is None else gram_tol
    defect = require_parseval(frame, tol)
    theta = frame.analysis_matrix
    J, d = theta.shape
    m = J - d

    if m == 0:
        psi_matrix = np.zeros((J, 0), dtype=complex)
    else:
        rng = rng if rng is not None else np.random.default_rng(settings.default_seed)
        Z = rng.standard_normal((J, m)) + 1j * rng.standard_normal((J, m))
        for _ in range(2):
            Z = Z - theta @ (theta.conj().T @ Z)
            Z, _ = np.linalg.qr(Z)
        psi_matrix = Z.conj()

    psi = Frame(psi_matrix, frame.labels)
    h = Frame(np.hstack([frame.matrix, psi_matrix]), frame.labels)

    gram_defect = float(np.max(np.abs(gram(h) - np.eye(J))))
    logger.debug("naimark_dilate", extra={"J": J, "d": d, "m": m, "gram_defect": gram_defect})
    if gram_defect > gram_tol + 2 * defect:
        raise InvariantViolationError(
            ["dilation_gram_identity"],
            f"invariant failed: dilation_gram_identity (max |Gram(h) - I| = {gram_defect:.3e})",
        )
    return DilationResult(phi=frame, psi=psi, h=h, m=m)


def check_projector(P: np.ndarray, tol: Optional[float] = None) -> Tuple[float, float]:
    tol = settings.projector_tol if tol is None else tol
    P = np.asarray(P, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"Projector must be square, got shape {P.shape}")
    hermitian_defect = float(np.linalg.norm(P - P.conj().T, 2))
    idempotent_defect = float(np.linalg.norm(P @ P - P, 2))
    if hermitian_defect > tol or idempotent_defect > tol:
        raise NotProjectorError(hermitian_defect, idempotent_defect)
    return hermitian_defect, idempotent_defect


def project_onb(
    dim: Optional[int],
    P: np.ndarray,
    tol: Optional[float] = None,
) -> Frame:
    """
    The family {P e_n} of an orthogonal projector on C^dim, written in an ONB of range(P).

    The result has dim members in dimension rank(P) and is a Parseval frame of
    range(P). dim=None takes the size from P.
    """
    P = np.asarray(P, dtype=complex)
    if dim is not None and P.shape != (dim, dim):
        raise DimensionMismatchError(dim, P.shape[0], what="projector")
    check_projector(P, tol)

    w, V = linalg.eigh((P + P.conj().T) / 2)
    basis = V[:, w > 0.5]
    # coordinates of P e_n in the basis are <v_k, e_n> = conj(V[n, k])
    frame = Frame(basis.conj())
    logger.debug("project_onb", extra={"d": P.shape[0], "rank": basis.shape[1]})
    return frame


def random_projector(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal projector onto a random k-dimensional subspace of C^d."""
    if not 0 <= k <= d:
        raise ValueError(f"rank {k} must lie in [0, {d}]")
    Z = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    Q, _ = np.linalg.qr(Z)
    P = Q @ Q.conj().T
    return (P + P.conj().T) / 2


def random_parseval_frame(d: int, J: int, rng: np.random.Generator) -> Frame:
    """J-element Parseval frame of C^d obtained by projecting an ONB of C^J."""
    if J < d:
        raise ValueError(f"a Parseval frame of C^{d} needs at least {d} vectors, got {J}")
    return project_onb(J, random_projector(J, d, rng))


# ---------------------------------------------------------------------------
# Hermitian functional calculus and the two-branch Riesz families
# ---------------------------------------------------------------------------


def hermitian_power(
    A: np.ndarray,
    power: float,
    floor: Optional[float] = None,
    pseudo: bool = False,
) -> np.ndarray:
    """
    A^power for a Hermitian positive semidefinite A via eigendecomposition.

    With pseudo=True eigenvalues at or below floor are treated as exactly zero
    (and stay zero for negative powers); otherwise they raise.
    """
    floor = settings.sqrt_floor if floor is None else floor
    A = np.asarray(A, dtype=complex)
    w, V = linalg.eigh((A + A.conj().T) / 2)
    keep = w > floor
    if not pseudo and not np.all(keep):
        raise NotPositiveDefiniteError(float(w.min()), floor)
    scaled = np.zeros_like(w)
    scaled[keep] = w[keep] ** power
    return (V * scaled) @ V.conj().T


def _columns_to_frame(columns: np.ndarray) -> Frame:
    return Frame(columns.T)


def riesz_pair_families(X: np.ndarray, onb: Optional[np.ndarray] = None) -> RieszPairFamilies:
    """
    Build the two biorthogonal pairs attached to an invertible operator X.

    Args:
        X: d x d invertible matrix
        onb: d x d unitary whose columns are the basis e_n (defaults to the reference ONB)

    Returns:
        RieszPairFamilies in the contractive or expansive branch

    Raises:
        MixedBranchError: If the spectrum of X*X straddles 1
        SingularMatrixError: If X is not invertible
    """
    X = np.asarray(X, dtype=complex)
    d = X.shape[0]
    if X.shape != (d, d):
        raise ValueError(f"X must be square, got shape {X.shape}")
    E = np.eye(d, dtype=complex) if onb is None else np.asarray(onb, dtype=complex)
    if E.shape != (d, d):
        raise DimensionMismatchError(d, E.shape[0], what="basis")

    sigma = linalg.svdvals(X)
    if sigma[-1] <= settings.rank_rtol * sigma[0]:
        raise SingularMatrixError(float(np.inf if sigma[-1] == 0 else sigma[0] / sigma[-1]))

    U = X.conj().T @ X
    U = (U + U.conj().T) / 2
    w = linalg.eigvalsh(U)
    X_inv = np.linalg.inv(X)
    identity = np.eye(d)

    if w.max() < 1.0:
        branch = Branch.CONTRACTIVE
        complement_op = identity - U
        riesz = X.conj().T @ E
        riesz_dual = X_inv @ E
    elif w.min() > 1.0:
        branch = Branch.EXPANSIVE
        complement_op = identity - np.linalg.inv(U)
        riesz = X_inv @ E
        riesz_dual = X.conj().T @ E
    else:
        raise MixedBranchError(float(w.min()), float(w.max()))

    complement = hermitian_power(complement_op, 0.5) @ E
    complement_dual = hermitian_power(complement_op, -0.5) @ E

    families = RieszPairFamilies(
        branch=branch,
        X=_readonly(X),
        riesz=_columns_to_frame(riesz),
        riesz_dual=_columns_to_frame(riesz_dual),
        complement=_columns_to_frame(complement),
        complement_dual=_columns_to_frame(complement_dual),
    )
    logger.debug(
        "riesz_pair_families",
        extra={"branch": branch.value, "d": d, "spectrum_min": float(w.min()), "spectrum_max": float(w.max())},
    )
    return families
