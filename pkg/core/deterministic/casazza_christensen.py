"""
Casazza-Christensen blocks
The Parseval frame of n+1 vectors in C^n with a one-dimensional complement,
the secular equation for the spectrum of its Hamiltonians, truncated ladder
operators a_n, the vertical maps V_{n+1}, and finite direct sums of blocks.

Frame labels run 1..n+1 in every block.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from config.settings import settings
from core.deterministic.frame_core import DilationResult, Frame, Vector
from core.deterministic.hamiltonian import (
    BOperatorReport,
    FrameHamiltonian,
    SpectrumReport,
    Weights,
    assemble,
    b_operator_matrix,
)
from core.exceptions import (
    DegenerateWeightsError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    WeightOrderError,
)

logger = logging.getLogger(__name__)


def _first_non_increase(values: np.ndarray) -> Optional[int]:
    bad = np.flatnonzero(np.diff(values) <= 0)
    return int(bad[0]) + 1 if bad.size else None


@dataclass(frozen=True, eq=False)
class CCBlock:
    """Block K_n with weights E_1 < ... < E_{n+1}."""

    n: int
    E: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"block size n must be >= 1, got {self.n}")
        E = np.asarray(self.E, dtype=float)
        if E.shape != (self.n + 1,):
            raise DimensionMismatchError(self.n + 1, E.size, what="block weights")
        if not np.all(np.isfinite(E)):
            raise ValueError("block weights must be finite")
        position = _first_non_increase(E)
        if position is not None:
            raise WeightOrderError(position)
        E = E.copy()
        E.setflags(write=False)
        object.__setattr__(self, "E", E)

    @property
    def frame(self) -> Frame:
        return cc_frame(self.n)

    def hamiltonian(self) -> FrameHamiltonian:
        return assemble(self.frame, self.E)


@dataclass(frozen=True, eq=False)
class SecularSolution:
    """Roots of sum_i 1/(E_i - mu) = 0, one per bracket (E_i, E_{i+1})."""

    roots: np.ndarray
    brackets: np.ndarray
    residuals: np.ndarray

    def interlaces(self) -> bool:
        return bool(np.all(self.brackets[:, 0] < self.roots) and np.all(self.roots < self.brackets[:, 1]))


@dataclass(frozen=True, eq=False)
class CCFamily:
    """Ordered blocks whose concatenated weights increase strictly."""

    blocks: Tuple[CCBlock, ...]

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("a family needs at least one block")
        object.__setattr__(self, "blocks", blocks)
        position = _first_non_increase(self.weights.E)
        if position is not None:
            raise WeightOrderError(position)

    @property
    def weights(self) -> Weights:
        return Weights(np.concatenate([block.E for block in self.blocks]))

    @property
    def dim(self) -> int:
        return sum(block.n for block in self.blocks)

    def truncated(self, N_blocks: Optional[int]) -> "CCFamily":
        if N_blocks is None:
            return self
        if not 1 <= N_blocks <= len(self.blocks):
            raise IndexOutOfRangeError(N_blocks, f"1..{len(self.blocks)} blocks")
        return CCFamily(self.blocks[:N_blocks])


# ---------------------------------------------------------------------------
# Frame and complement
# ---------------------------------------------------------------------------


def cc_frame(n: int) -> Frame:
    """phi_j = e_j - (1/n) sum_i e_i for j <= n, phi_{n+1} = (1/sqrt n) sum_i e_i."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rows = np.vstack([np.eye(n) - 1.0 / n, np.full((1, n), 1.0 / math.sqrt(n))])
    return Frame(rows, tuple(range(1, n + 2)))


def cc_complementary(n: int) -> Frame:
    """psi_j = 1/sqrt(n) for j <= n and psi_{n+1} = 0, as vectors of C^1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    column = np.append(np.full(n, 1.0 / math.sqrt(n)), 0.0)
    return Frame(column[:, None], tuple(range(1, n + 2)))


def cc_dilation(n: int) -> DilationResult:
    phi = cc_frame(n)
    psi = cc_complementary(n)
    h = Frame(np.hstack([phi.matrix, psi.matrix]), phi.labels)
    return DilationResult(phi=phi, psi=psi, h=h, m=1)


# ---------------------------------------------------------------------------
# Secular equation and block spectra
# ---------------------------------------------------------------------------


def _secular(E: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return np.sum(1.0 / (E[None, :] - mu[:, None]), axis=1)


def secular_roots(
    E: Sequence[float],
    tol: Optional[float] = None,
    gap_rtol: Optional[float] = None,
) -> SecularSolution:
    """
    Solve 1/(E_1 - mu) + ... + 1/(E_n - mu) = 0 by bisection.

    The function increases from -inf to +inf on each open bracket (E_i, E_{i+1}),
    so every bracket holds exactly one root. All brackets are bisected together
    until none can be halved further; the final width is at most
    tol * (E_n - E_1).

    Args:
        E: Strictly increasing weights, n >= 2
        tol: Relative bracket tolerance (default settings.secular_rtol)
        gap_rtol: Minimum relative gap between consecutive weights

    Returns:
        SecularSolution with n-1 roots

    Raises:
        DegenerateWeightsError: If weights repeat or are closer than gap_rtol * span
    """
    tol = settings.secular_rtol if tol is None else tol
    gap_rtol = settings.degenerate_gap_rtol if gap_rtol is None else gap_rtol
    E = np.asarray(E, dtype=float)
    if E.ndim != 1 or E.size < 2:
        raise ValueError("secular_roots needs at least two weights")
    gaps = np.diff(E)
    span = float(E[-1] - E[0])
    min_gap = float(gaps.min())
    if min_gap <= 0 or min_gap < gap_rtol * span:
        raise DegenerateWeightsError(min_gap)

    lo, hi = E[:-1].copy(), E[1:].copy()
    for _ in range(settings.secular_max_iterations):
        mid = 0.5 * (lo + hi)
        active = (lo < mid) & (mid < hi)
        if not active.any():
            break
        to_right = _secular(E, mid) < 0
        lo = np.where(active & to_right, mid, lo)
        hi = np.where(active & ~to_right, mid, hi)

    width = float(np.max(hi - lo))
    if width > tol * span:
        logger.warning("secular_bracket_wide", extra={"width": width, "bound": tol * span})

    roots = 0.5 * (lo + hi)
    terms = 1.0 / (E[None, :] - roots[:, None])
    residuals = np.abs(terms.sum(axis=1)) / np.abs(terms).sum(axis=1)
    logger.debug("secular_solved", extra={"n": int(E.size), "max_residual": float(residuals.max())})
    return SecularSolution(roots=roots, brackets=np.column_stack([E[:-1], E[1:]]), residuals=residuals)


def cc_block_spectrum(block: CCBlock) -> SpectrumReport:
    """
    Spectrum of the block Hamiltonian from the secular equation.

    The eigenvalues are the n-1 secular roots mu_j, with eigenvectors
    f_j = sum_i e_i / (E_i - mu_j), followed by E_{n+1} with eigenvector phi_{n+1}.
    """
    n = block.n
    H = block.hamiltonian()
    if n >= 2:
        roots = secular_roots(block.E[:n]).roots
    else:
        roots = np.empty(0)

    columns: List[np.ndarray] = [1.0 / (block.E[:n] - mu) for mu in roots]
    columns.append(np.ones(n))
    V = np.column_stack(columns).astype(complex)
    V /= np.linalg.norm(V, axis=0)
    eigenvalues = np.append(roots, block.E[n])

    residuals = np.linalg.norm(H.matrix @ V - V * eigenvalues, axis=0)
    kinds = ("secular",) * (n - 1) + ("top",)
    return SpectrumReport(eigenvalues=eigenvalues, eigenvectors=V, residuals=residuals, kinds=kinds)


# ---------------------------------------------------------------------------
# Ladder and vertical operators
# ---------------------------------------------------------------------------


def ladder_a(n: int) -> np.ndarray:
    """Truncated lowering matrix: a e_1 = 0, a e_j = sqrt(j-1) e_{j-1}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1)


def ladder_a_star(n: int) -> np.ndarray:
    return ladder_a(n).conj().T


def truncated_commutator_defect(n: int) -> float:
    """max |[a_n, a_n*] - (I - n P_n)| with P_n the projector onto e_n."""
    a = ladder_a(n)
    commutator = a @ a.T - a.T @ a
    expected = np.eye(n)
    expected[-1, -1] -= n
    return float(np.max(np.abs(commutator - expected)))


def ladder_action_on_frame(n: int, j: int) -> Vector:
    """
    a_n phi_j written through the frame vectors.

    With e~ = (1/n) sum_{i<n} sqrt(i) e_i:
        j = 1:         -e~
        2 <= j <= n:   sqrt(j-1) phi_{j-1} + sqrt(j-1)/sqrt(n) phi_{n+1} - e~
        j = n+1:       sqrt(n) e~
    """
    if not 1 <= j <= n + 1:
        raise IndexOutOfRangeError(j, f"1..{n + 1}")
    frame = cc_frame(n)
    e_tilde = np.zeros(n)
    e_tilde[: n - 1] = np.sqrt(np.arange(1, n)) / n
    if j == 1:
        out = -e_tilde
    elif j <= n:
        root = math.sqrt(j - 1)
        out = root * frame.matrix[j - 2] + root / math.sqrt(n) * frame.matrix[n] - e_tilde
    else:
        out = math.sqrt(n) * e_tilde
    return Vector(out)


def vertical_v(n: int) -> np.ndarray:
    """V_{n+1}: C^{n+1} -> C^n with V e_j = phi_j; its columns are the frame vectors."""
    return cc_frame(n).synthesis_matrix.copy()


def vertical_defects(n: int) -> Tuple[float, float, int]:
    """(max |V V* - I_n|, max |(V*V)^2 - V*V|, rank V*V)."""
    V = vertical_v(n)
    VV = V @ V.conj().T
    VstarV = V.conj().T @ V
    co_isometry = float(np.max(np.abs(VV - np.eye(n))))
    idempotency = float(np.max(np.abs(VstarV @ VstarV - VstarV)))
    rank = int(np.linalg.matrix_rank(VstarV, tol=1e-8))
    return co_isometry, idempotency, rank


# ---------------------------------------------------------------------------
# Direct sums
# ---------------------------------------------------------------------------


def cc_family_frame(family: CCFamily, N_blocks: Optional[int] = None) -> Frame:
    """Union of the block frames embedded block-diagonally; a Parseval frame of the direct sum."""
    family = family.truncated(N_blocks)
    matrix = linalg.block_diag(*[cc_frame(block.n).matrix for block in family.blocks])
    labels = tuple((block.n, j) for block in family.blocks for j in range(1, block.n + 2))
    return Frame(matrix, labels)


def direct_sum_hamiltonian(family: CCFamily, N_blocks: Optional[int] = None) -> FrameHamiltonian:
    """Block-diagonal Hamiltonian over the first N_blocks blocks."""
    family = family.truncated(N_blocks)
    matrix = linalg.block_diag(*[block.hamiltonian().matrix for block in family.blocks])
    return FrameHamiltonian(matrix, cc_family_frame(family), family.weights, provenance="direct_sum")


def cc_family_spectrum(family: CCFamily, N_blocks: Optional[int] = None) -> SpectrumReport:
    """Union of block spectra, eigenvectors embedded in the direct sum, merged by block index."""
    family = family.truncated(N_blocks)
    dim = family.dim
    values, vectors, residuals, kinds, blocks = [], [], [], [], []
    offset = 0
    for index, block in enumerate(family.blocks):
        report = cc_block_spectrum(block)
        embedded = np.zeros((dim, report.eigenvalues.size), dtype=complex)
        embedded[offset : offset + block.n] = report.eigenvectors
        values.append(report.eigenvalues)
        vectors.append(embedded)
        residuals.append(report.residuals)
        kinds.extend(report.kinds)
        blocks.extend([index + 1] * report.eigenvalues.size)
        offset += block.n

    eigenvalues = np.concatenate(values)
    order = np.argsort(eigenvalues, kind="stable")
    return SpectrumReport(
        eigenvalues=eigenvalues[order],
        eigenvectors=np.hstack(vectors)[:, order],
        residuals=np.concatenate(residuals)[order],
        kinds=tuple(kinds[i] for i in order),
        blocks=tuple(blocks[i] for i in order),
    )


def cc_b_operator(family: CCFamily, N_blocks: Optional[int] = None) -> BOperatorReport:
    """
    B over the direct sum: one row per block, (1/sqrt n) sum_{j<=n} E_j <phi_j, .>.

    Also reports sup_{n, j<=n} |E_j^(n)| / sqrt(n), which bounds the growth of ||B||.
    """
    family = family.truncated(N_blocks)
    rows = [b_operator_matrix(cc_dilation(block.n), block.E).matrix for block in family.blocks]
    B = linalg.block_diag(*rows)
    norm = float(np.linalg.norm(B, 2))
    sup_ratio = max(float(np.max(np.abs(block.E[: block.n]))) / math.sqrt(block.n) for block in family.blocks)
    return BOperatorReport(matrix=B, norm=norm, sup_ratio=sup_ratio)


def ranked_family(N_blocks: int, start: float = 1.0) -> CCFamily:
    """Blocks n = 1..N_blocks whose weights are consecutive global ranks start, start+1, ..."""
    blocks = []
    rank = start
    for n in range(1, N_blocks + 1):
        blocks.append(CCBlock(n, rank + np.arange(n + 1, dtype=float)))
        rank += n + 1
    return CCFamily(tuple(blocks))


def sqrt_bounded_family(N_blocks: int) -> CCFamily:
    """E_j^(n) = sqrt(n) + (j-1)/(4 n^(3/2)); increasing across blocks with E_j^(n)/sqrt(n) <= 1.25."""
    blocks = []
    for n in range(1, N_blocks + 1):
        j = np.arange(n + 1, dtype=float)
        blocks.append(CCBlock(n, math.sqrt(n) + j / (4.0 * n**1.5)))
    return CCFamily(tuple(blocks))
