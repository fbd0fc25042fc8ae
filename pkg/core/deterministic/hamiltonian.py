"""
Frame Hamiltonians
Operators H = sum_j E_j <phi_j, .> phi_j generated by a Parseval frame and real
weights: assembly, dense spectra, eigenvalue certificates, the quasi-eigenpair
test, the Riesz-split factorisation, the off-diagonal operator B of the
dilation, and growth diagnostics for truncated unbounded cases.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from config.settings import settings
from core.deterministic.frame_core import (
    ArrayLike,
    DilationResult,
    Frame,
    Vector,
    as_coeffs,
    frame_operator,
    gram,
    hermitian_power,
    range_projector,
    synthesis,
)
from core.exceptions import (
    DimensionMismatchError,
    EmptyScheduleError,
    InvariantViolationError,
    NotRieszSubfamilyError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Weights:
    """Real weights E_j aligned with the labels of a frame."""

    E: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.E, dtype=float)
        if E.ndim != 1:
            raise ValueError(f"Weights must be one-dimensional, got shape {E.shape}")
        if not np.all(np.isfinite(E)):
            raise ValueError("Weights must be finite")
        E = E.copy()
        E.setflags(write=False)
        object.__setattr__(self, "E", E)

    def __len__(self) -> int:
        return int(self.E.shape[0])

    @property
    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.E), initial=0.0))


def as_weights(weights: Union[Weights, Sequence[float], np.ndarray]) -> Weights:
    return weights if isinstance(weights, Weights) else Weights(np.asarray(weights, dtype=float))


@dataclass(frozen=True, eq=False)
class FrameHamiltonian:
    """Hermitian d x d matrix together with the data that generated it."""

    matrix: np.ndarray
    frame: Optional[Frame] = None
    weights: Optional[Weights] = None
    provenance: str = "assemble"

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2)) if self.dim else 0.0

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def apply(self, f: Union[Vector, ArrayLike]) -> np.ndarray:
        return self.matrix @ as_coeffs(f)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """
    Eigenpairs sorted by eigenvalue.

    eigenvectors holds unit vectors as columns. kinds and blocks are optional
    per-pair annotations (e.g. "secular"/"top" and block index for direct sums).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    kinds: Tuple[str, ...] = ()
    blocks: Tuple[int, ...] = ()

    @property
    def vectors(self) -> List[Vector]:
        return [Vector(col) for col in self.eigenvectors.T]

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals, initial=0.0))

    def grouped(self, rtol: float = 1e-9) -> List[Tuple[float, int, float]]:
        """Collapse numerically equal eigenvalues into (mu, multiplicity, max residual)."""
        groups: List[Tuple[float, int, float]] = []
        values: List[float] = []
        residuals: List[float] = []
        for value, residual in zip(self.eigenvalues, self.residuals):
            if values and abs(value - values[-1]) > rtol * max(1.0, abs(value)):
                groups.append((float(np.mean(values)), len(values), float(max(residuals))))
                values, residuals = [], []
            values.append(float(value))
            residuals.append(float(residual))
        if values:
            groups.append((float(np.mean(values)), len(values), float(max(residuals))))
        return groups


@dataclass(frozen=True, eq=False)
class QuasiEigenpairReport:
    label: Hashable
    is_eigenpair: bool
    residual: float
    finiteness_sum: float
    eigen_residual: float


@dataclass(frozen=True, eq=False)
class EigCertificate:
    """Coefficient sequence c in R(theta_phi) with (E - mu) c orthogonal to it."""

    mu: float
    c: np.ndarray
    defect_in_range: float
    defect_orthogonal: float
    eigvec: Vector
    smallest_singular_value: float
    eigen_residual: float


@dataclass(frozen=True, eq=False)
class RieszSplit:
    """Factorisation H = A0 + A1 from a Riesz subfamily J0 and its complement J1."""

    A0: np.ndarray
    A1: np.ndarray
    onb: Frame  # e_j = S0^(-1/2) phi_j, j in J0
    complement_frame: Frame  # pseudo-inverse root of (I - S0) applied to phi_j, j in J1
    gram_condition: float

    @property
    def matrix(self) -> np.ndarray:
        H = self.A0 + self.A1
        return (H + H.conj().T) / 2


@dataclass(frozen=True, eq=False)
class BOperatorReport:
    matrix: np.ndarray
    norm: float
    sup_ratio: Optional[float] = None


class Tail(str, Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class BoundednessReport:
    sup_abs: float
    declared_tail: Tail
    operator_class: str
    size: int


@dataclass(frozen=True, eq=False)
class DomainGrowthTrace:
    schedule: np.ndarray
    partial_sums: np.ndarray
    exponent: float
    diverging: bool
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Assembly and dense spectra
# ---------------------------------------------------------------------------


def _hermitian_sum(matrix: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Symmetrised sum_j E_j v_j v_j* over the rows v_j of matrix."""
    A = (matrix.T * E) @ matrix.conj()
    return (A + A.conj().T) / 2


def assemble(frame: Frame, weights: Union[Weights, Sequence[float]]) -> FrameHamiltonian:
    """H = sum_j E_j phi_j phi_j*, made exactly Hermitian by (A + A*)/2."""
    weights = as_weights(weights)
    if len(weights) != frame.size:
        raise DimensionMismatchError(frame.size, len(weights), what="weights")
    return FrameHamiltonian(_hermitian_sum(frame.matrix, weights.E), frame, weights)


def dense_spectrum(H: FrameHamiltonian) -> SpectrumReport:
    """Full Hermitian eigendecomposition, ascending, with per-pair residuals."""
    w, V = linalg.eigh(H.matrix)
    residuals = np.linalg.norm(H.matrix @ V - V * w, axis=0)
    bound = 1e-10 * max(H.norm(), 1.0)
    if residuals.size and residuals.max() > bound:
        logger.warning("dense_spectrum_residual", extra={"max_residual": float(residuals.max()), "bound": bound})
    return SpectrumReport(eigenvalues=w, eigenvectors=V, residuals=residuals)


def quadratic_form(H: FrameHamiltonian, f: Union[Vector, ArrayLike]) -> complex:
    """<Hf, f>; real for every f because H is built from real weights."""
    f = as_coeffs(f)
    return complex(np.vdot(H.apply(f), f))


# ---------------------------------------------------------------------------
# Eigenvalue tests
# ---------------------------------------------------------------------------


def quasi_eigenpair_check(
    dilation: DilationResult,
    weights: Union[Weights, Sequence[float]],
    label: Hashable,
    tol: Optional[float] = None,
) -> QuasiEigenpairReport:
    """
    Decide whether (E_n, phi_n) is an eigenpair of H from the complementary family.

    (E_n, phi_n) is an eigenpair iff sum_j E_j <psi_j, psi_n> phi_j vanishes; the
    series sum_j E_j^2 |<psi_j, psi_n>|^2 is reported as well (always finite here).

    Raises:
        InvariantViolationError: If that residual disagrees with ||H phi_n - E_n phi_n||
    """
    tol = settings.quasi_eig_tol if tol is None else tol
    weights = as_weights(weights)
    phi = dilation.phi
    if len(weights) != phi.size:
        raise DimensionMismatchError(phi.size, len(weights), what="weights")
    pos = phi.position(label)

    psi = dilation.psi.matrix
    overlaps = psi.conj() @ psi[pos]  # <psi_j, psi_n>
    E = weights.E
    finiteness_sum = float(np.sum(E**2 * np.abs(overlaps) ** 2))
    residual = float(np.linalg.norm(phi.matrix.T @ (E * overlaps)))

    H = assemble(phi, weights)
    phi_n = phi.matrix[pos]
    eigen_residual = float(np.linalg.norm(H.apply(phi_n) - E[pos] * phi_n))

    # H phi_n - E_n phi_n = -sum_j E_j <psi_j, psi_n> phi_j when Gram(h) = I
    mismatch = abs(residual - eigen_residual)
    if mismatch > settings.eigvec_tol * max(1.0, weights.sup_abs):
        logger.warning(
            "quasi_eigenpair_inconsistent",
            extra={"label": label, "residual": residual, "eigen_residual": eigen_residual},
        )
        raise InvariantViolationError(
            ["quasi_eigenpair_consistency"],
            f"invariant failed: quasi_eigenpair_consistency (|{residual:.3e} - {eigen_residual:.3e}| at label {label!r})",
        )
    is_eigenpair = residual <= tol
    return QuasiEigenpairReport(label, is_eigenpair, residual, finiteness_sum, eigen_residual)


def point_spectrum_certificate(
    frame: Frame,
    weights: Union[Weights, Sequence[float]],
    mu: float,
    rtol: Optional[float] = None,
    tol: Optional[float] = None,
) -> Optional[EigCertificate]:
    """
    Certify mu as an eigenvalue by a sequence c in R(theta_phi) with (E - mu)c in R(theta_phi)^perp.

    The operator P_R diag(E - mu) P_R restricted to R(theta_phi) is written in the
    orthonormal basis given by the columns of the analysis matrix; a null vector
    there (smallest singular value below rtol * max(1, max|E - mu|)) yields c, and
    synthesis(c) is the eigenvector.

    Returns:
        EigCertificate, or None when mu is not certified
    """
    rtol = settings.certificate_rtol if rtol is None else rtol
    tol = settings.eigvec_tol if tol is None else tol
    weights = as_weights(weights)
    if len(weights) != frame.size:
        raise DimensionMismatchError(frame.size, len(weights), what="weights")

    P_R = range_projector(frame)
    theta = frame.analysis_matrix
    shifted = weights.E - mu
    M = theta.conj().T @ (shifted[:, None] * theta)
    M = (M + M.conj().T) / 2

    _, s, Vh = linalg.svd(M)
    scale = max(1.0, float(np.max(np.abs(shifted))))
    smallest = float(s[-1])
    if smallest > rtol * scale:
        return None

    c = theta @ Vh[-1].conj()
    defect_in_range = float(np.linalg.norm(c - P_R @ c))
    defect_orthogonal = float(np.linalg.norm(P_R @ (shifted * c)))
    eigvec = synthesis(frame, c)

    H = assemble(frame, weights)
    eigen_residual = float(np.linalg.norm(H.apply(eigvec) - mu * eigvec.coeffs))
    if eigen_residual > tol * scale:
        logger.warning("certificate_rejected", extra={"mu": mu, "eigen_residual": eigen_residual})
        return None

    return EigCertificate(
        mu=float(mu),
        c=c,
        defect_in_range=defect_in_range,
        defect_orthogonal=defect_orthogonal,
        eigvec=eigvec,
        smallest_singular_value=smallest,
        eigen_residual=eigen_residual,
    )


def scan_certificates(
    frame: Frame,
    weights: Union[Weights, Sequence[float]],
    candidates: Iterable[float],
) -> List[Tuple[float, Optional[EigCertificate]]]:
    """Run point_spectrum_certificate over candidate values, in order."""
    return [(float(mu), point_spectrum_certificate(frame, weights, mu)) for mu in candidates]


# ---------------------------------------------------------------------------
# Riesz split
# ---------------------------------------------------------------------------


def riesz_split(
    frame: Frame,
    weights: Union[Weights, Sequence[float]],
    J0: Iterable[Hashable],
    J1: Iterable[Hashable],
    cond_max: Optional[float] = None,
    floor: Optional[float] = None,
) -> RieszSplit:
    """
    Factor H through a Riesz subfamily {phi_j, j in J0} and its complement.

    A0 = S0^(1/2) H_e0 S0^(1/2) with the ONB e_j = S0^(-1/2) phi_j (j in J0), and
    A1 = (I - S0)^(1/2) H_e1 (I - S0)^(1/2) with the Parseval frame of
    range(I - S0) obtained by applying the pseudo-inverse root to phi_j (j in J1).
    Eigenvalues of I - S0 below floor are treated as zero.

    Raises:
        NotRieszSubfamilyError: If {phi_j, j in J0} is not a Riesz basis (Gram condition >= cond_max)
    """
    cond_max = settings.riesz_cond_max if cond_max is None else cond_max
    weights = as_weights(weights)
    if len(weights) != frame.size:
        raise DimensionMismatchError(frame.size, len(weights), what="weights")
    J0, J1 = tuple(J0), tuple(J1)
    if len(set(J0) | set(J1)) != len(J0) + len(J1) or set(J0) | set(J1) != set(frame.labels):
        raise ValueError("J0 and J1 must partition the frame labels")

    E_by_label = dict(zip(frame.labels, weights.E))
    F0, F1 = frame.subset(J0), frame.subset(J1)
    if F0.size != frame.dim:
        raise NotRieszSubfamilyError(
            float("inf"),
            message=f"not a Riesz subfamily: {F0.size} vectors cannot form a basis of C^{frame.dim}",
        )
    condition = float(np.linalg.cond(gram(F0)))
    if not np.isfinite(condition) or condition >= cond_max:
        raise NotRieszSubfamilyError(condition)

    identity = np.eye(frame.dim)
    S0 = frame_operator(F0)
    S0_root = hermitian_power(S0, 0.5, floor)
    onb = Frame(F0.matrix @ hermitian_power(S0, -0.5, floor).T, J0)
    E0 = np.array([E_by_label[label] for label in J0])
    A0 = S0_root @ _hermitian_sum(onb.matrix, E0) @ S0_root

    complement_op = identity - S0
    R = hermitian_power(complement_op, 0.5, floor, pseudo=True)
    R_pinv = hermitian_power(complement_op, -0.5, floor, pseudo=True)
    complement_frame = Frame(F1.matrix @ R_pinv.T, J1)
    if F1.size:
        E1 = np.array([E_by_label[label] for label in J1])
        A1 = R @ _hermitian_sum(complement_frame.matrix, E1) @ R
    else:
        A1 = np.zeros_like(A0)

    logger.debug("riesz_split", extra={"J0": len(J0), "J1": len(J1), "gram_condition": condition})
    return RieszSplit(A0=A0, A1=A1, onb=onb, complement_frame=complement_frame, gram_condition=condition)


def riesz_split_assemble(
    frame: Frame,
    weights: Union[Weights, Sequence[float]],
    J0: Iterable[Hashable],
    J1: Iterable[Hashable],
    cond_max: Optional[float] = None,
) -> FrameHamiltonian:
    """H assembled as A0 + A1 from the Riesz split; agrees with assemble()."""
    split = riesz_split(frame, weights, J0, J1, cond_max)
    return FrameHamiltonian(split.matrix, frame, as_weights(weights), provenance="riesz_split")


# ---------------------------------------------------------------------------
# Dilation-side operators
# ---------------------------------------------------------------------------


def b_operator_matrix(dilation: DilationResult, weights: Union[Weights, Sequence[float]]) -> BOperatorReport:
    """B f = sum_j E_j <phi_j, f> psi_j, an m x d matrix, with its spectral norm."""
    weights = as_weights(weights)
    if len(weights) != dilation.phi.size:
        raise DimensionMismatchError(dilation.phi.size, len(weights), what="weights")
    B = dilation.psi.matrix.T @ (weights.E[:, None] * dilation.phi.matrix.conj())
    norm = float(np.linalg.norm(B, 2)) if B.size else 0.0
    return BOperatorReport(matrix=B, norm=norm)


def dilated_hamiltonian(dilation: DilationResult, weights: Union[Weights, Sequence[float]]) -> np.ndarray:
    """H_h = sum_j E_j h_j h_j* on K + M; diagonal in the orthonormal basis {h_j}."""
    weights = as_weights(weights)
    if len(weights) != dilation.h.size:
        raise DimensionMismatchError(dilation.h.size, len(weights), what="weights")
    return _hermitian_sum(dilation.h.matrix, weights.E)


def compression_defect(dilation: DilationResult, weights: Union[Weights, Sequence[float]]) -> float:
    """|| P_K H_h |_K - H || for the frame Hamiltonian H."""
    d = dilation.phi.dim
    H_h = dilated_hamiltonian(dilation, weights)
    H = assemble(dilation.phi, weights)
    return float(np.linalg.norm(H_h[:d, :d] - H.matrix, 2)) if d else 0.0


def energy_split_defect(
    dilation: DilationResult,
    weights: Union[Weights, Sequence[float]],
    f: Union[Vector, ArrayLike],
) -> float:
    """| ||H_h f||^2 - ||H f||^2 - ||B f||^2 | for f in K."""
    f = as_coeffs(f)
    lifted = np.concatenate([f, np.zeros(dilation.m, dtype=complex)])
    H_h = dilated_hamiltonian(dilation, weights)
    H = assemble(dilation.phi, weights)
    B = b_operator_matrix(dilation, weights).matrix
    lhs = np.linalg.norm(H_h @ lifted) ** 2
    rhs = np.linalg.norm(H.apply(f)) ** 2 + (np.linalg.norm(B @ f) ** 2 if B.size else 0.0)
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# Boundedness and domain growth
# ---------------------------------------------------------------------------


def classify_boundedness(
    weights: Union[Weights, Sequence[float]],
    declared_tail: Union[Tail, str],
) -> BoundednessReport:
    """Report sup|E_j| on the given data and echo the declared asymptotic class."""
    weights = as_weights(weights)
    tail = Tail(declared_tail)
    operator_class = (
        "bounded self-adjoint" if tail is Tail.BOUNDED else "unbounded (represented by truncations)"
    )
    return BoundednessReport(weights.sup_abs, tail, operator_class, len(weights))


def geometric_schedule(N: int, ratio: int = 2) -> np.ndarray:
    """1, ratio, ratio^2, ... up to N, always ending at N."""
    if N < 1:
        raise ValueError("truncation N must be positive")
    points = []
    k = 1
    while k < N:
        points.append(k)
        k *= ratio
    points.append(N)
    return np.array(points, dtype=int)


def frame_terms(frame: Frame, weights: Union[Weights, Sequence[float]]) -> Iterator[Tuple[np.ndarray, float]]:
    """(phi_j, E_j) pairs of a finite frame, in label order."""
    weights = as_weights(weights)
    return zip(frame.matrix, weights.E)


def domain_growth_diagnostic(
    terms: Iterable[Tuple[Union[Vector, ArrayLike], float]],
    f: Union[Vector, ArrayLike],
    N: int,
    schedule: Optional[Sequence[int]] = None,
    threshold: Optional[float] = None,
) -> DomainGrowthTrace:
    """
    Partial sums sum_{j<=n} E_j^2 |<phi_j, f>|^2 on a geometric schedule of n <= N.

    The growth exponent is the least-squares slope of log(sum) against log(n)
    over the upper half of the schedule; the sequence is flagged as diverging
    when the exponent exceeds the threshold.

    Raises:
        EmptyScheduleError: If the schedule is empty or has an entry below 1
    """
    threshold = settings.divergence_exponent_threshold if threshold is None else threshold
    f = as_coeffs(f)
    targets = geometric_schedule(N) if schedule is None else np.array(sorted(set(schedule)), dtype=int)
    if targets.size == 0 or targets[0] < 1:
        raise EmptyScheduleError(list(targets))
    wanted = set(int(t) for t in targets)

    running = 0.0
    reached: List[int] = []
    sums: List[float] = []
    for count, (phi, E) in enumerate(itertools.islice(terms, int(targets.max())), start=1):
        running += float(E) ** 2 * abs(np.vdot(as_coeffs(phi), f)) ** 2
        if count in wanted:
            reached.append(count)
            sums.append(running)

    reached_arr = np.array(reached, dtype=int)
    sums_arr = np.array(sums, dtype=float)
    exponent = _growth_exponent(reached_arr, sums_arr)
    trace = DomainGrowthTrace(reached_arr, sums_arr, exponent, exponent > threshold)
    logger.debug("domain_growth", extra={"points": len(reached), "exponent": exponent})
    return trace


def _growth_exponent(points: np.ndarray, sums: np.ndarray) -> float:
    half = points.size // 2
    mask = sums[half:] > 0
    x, y = points[half:][mask], sums[half:][mask]
    if x.size < 2:
        return 0.0
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def example_domain_terms(
    N: int,
    weight_fn=lambda n: float(n) ** 2,
) -> Iterator[Tuple[np.ndarray, float]]:
    """
    The two-sided frame phi_n = e_n / n, phi_-n = sqrt(1 - 1/n^2) e_n in C^N.

    Yields (phi_n, E_n), (phi_-n, 0) for n = 1..N; E_n = weight_fn(n), n^2 by default.
    """
    for n in range(1, N + 1):
        e_n = np.zeros(N, dtype=complex)
        e_n[n - 1] = 1.0
        yield e_n / n, weight_fn(n)
        yield np.sqrt(1.0 - 1.0 / n**2) * e_n, 0.0


def example_domain_frame(N: int, weight_fn=lambda n: float(n) ** 2) -> Tuple[Frame, Weights]:
    """Finite truncation of example_domain_terms as a Parseval frame with labels 1, -1, 2, -2, ..."""
    vectors, E = zip(*example_domain_terms(N, weight_fn))
    labels = [sign * n for n in range(1, N + 1) for sign in (1, -1)]
    return Frame.from_vectors(vectors, labels), Weights(np.array(E))
