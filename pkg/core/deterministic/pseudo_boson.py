"""
Pseudo-boson families on a uniform grid
Hermite states, the multiplication and translation operators K and T with
X* = TK, the biorthogonal families phi/psi and phi~/psi~ built from a weight
m(x) with 0 < |m| < 1, their union Parseval frame, the ladder and number
operators, and the split Hamiltonian H = H1 + H2.

Functions are sampled on x_i = -L + i h, h = 2L/(P-1); inner products use the
trapezoid weight h. Translations are restricted to alpha = k h, so T is an
exact index shift with zero fill and all discretisation error sits in the
derivative (4th-order central differences with zero extension).
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from config.settings import settings
from core.exceptions import (
    DegenerateWeightFunctionError,
    DimensionMismatchError,
    GridAlignmentError,
    GridResolutionError,
    IndexOutOfRangeError,
    WeightBoundError,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Grid:
    """Uniform grid of P nodes on [-L, L]."""

    L: float
    P: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"grid half-width must be positive, got {self.L}")
        if self.P < settings.min_grid_points:
            raise ValueError(f"grid needs at least {settings.min_grid_points} nodes, got {self.P}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.P - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.shifted_nodes(0)

    def shifted_nodes(self, k: int) -> np.ndarray:
        """x_i - k h, computed so that shifted_nodes(k)[i] == nodes[i - k] bit for bit."""
        return -self.L + (np.arange(self.P) - k) * self.h

    def cells(self, alpha: float) -> int:
        """Number of cells k with alpha = k h."""
        k = int(round(alpha / self.h))
        if k < 0 or abs(alpha - k * self.h) > settings.alignment_rtol * self.h:
            raise GridAlignmentError(alpha, self.h)
        return k

    def refined(self) -> "Grid":
        """Same interval with the spacing halved (P -> 2P - 1)."""
        return Grid(self.L, 2 * self.P - 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    samples: np.ndarray
    grid: Grid

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.shape != (self.grid.P,):
            raise DimensionMismatchError(self.grid.P, samples.size, what="grid samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("grid samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], grid: Grid) -> "GridFunction":
        return cls(fn(grid.nodes), grid)

    def norm(self) -> float:
        return math.sqrt(self.grid.h * float(np.sum(np.abs(self.samples) ** 2)))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.samples + other.samples, self.grid)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.samples - other.samples, self.grid)

    def __mul__(self, scalar: complex) -> "GridFunction":
        return GridFunction(self.samples * scalar, self.grid)

    __rmul__ = __mul__


def inner(f: GridFunction, g: GridFunction) -> complex:
    """<f, g> = h sum conj(f_i) g_i."""
    return complex(f.grid.h * np.vdot(f.samples, g.samples))


def grid_norm(samples: np.ndarray, grid: Grid) -> float:
    return math.sqrt(grid.h * float(np.sum(np.abs(samples) ** 2)))


# ---------------------------------------------------------------------------
# Hermite states
# ---------------------------------------------------------------------------


def _check_hermite_support(n: int, grid: Grid, half_width: Optional[float] = None) -> None:
    half_width = grid.L if half_width is None else half_width
    required = math.sqrt(2 * n + 1) + settings.hermite_tail_margin
    if half_width < required:
        raise GridResolutionError(n, half_width, required)


@lru_cache(maxsize=32)
def _hermite_table(N: int, L: float, P: int) -> np.ndarray:
    x = Grid(L, P).nodes
    table = np.empty((N, P))
    table[0] = math.pi**-0.25 * np.exp(-(x**2) / 2)
    if N > 1:
        table[1] = SQRT2 * x * table[0]
    for n in range(2, N):
        table[n] = math.sqrt(2.0 / n) * x * table[n - 1] - math.sqrt((n - 1) / n) * table[n - 2]
    table.setflags(write=False)
    return table


def hermite_states(N: int, grid: Grid) -> np.ndarray:
    """Rows e_0..e_{N-1} sampled on the grid (read-only)."""
    if N < 1:
        raise ValueError(f"need at least one Hermite state, got N={N}")
    _check_hermite_support(N - 1, grid)
    return _hermite_table(N, grid.L, grid.P)


def hermite_state(n: int, grid: Grid) -> GridFunction:
    """e_n(x) = (2^n n! sqrt(pi))^(-1/2) H_n(x) exp(-x^2/2) by the stable three-term recurrence."""
    if n < 0:
        raise ValueError(f"Hermite order must be nonnegative, got {n}")
    return GridFunction(hermite_states(n + 1, grid)[n], grid)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """
    Weight m(x) with 0 < |m| < 1 and the translation alpha.

    dm is the analytic derivative; when absent, a 4th-order central difference
    of m is used and flagged as such.
    """

    m: Callable[[np.ndarray], np.ndarray]
    alpha: float = 0.0
    dm: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def values(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.m(x), dtype=complex), x.shape).copy()

    def cells(self, grid: Grid) -> int:
        return grid.cells(self.alpha)

    def shifted(self, grid: Grid) -> np.ndarray:
        """m(x_i - alpha) at every node."""
        return self.values(grid.shifted_nodes(self.cells(grid)))

    def derivative_shifted(self, grid: Grid) -> Tuple[np.ndarray, str]:
        """m'(x_i - alpha) and where it came from ("analytic" or "finite_difference")."""
        x = grid.shifted_nodes(self.cells(grid))
        if self.dm is not None:
            return np.broadcast_to(np.asarray(self.dm(x), dtype=complex), x.shape).copy(), "analytic"
        h = grid.h
        stencil = (
            self.values(x - 2 * h) - 8 * self.values(x - h) + 8 * self.values(x + h) - self.values(x + 2 * h)
        ) / (12 * h)
        return stencil, "finite_difference"

    def bounds(self, grid: Grid) -> Tuple[float, float]:
        magnitudes = np.abs(np.concatenate([self.values(grid.nodes), self.shifted(grid)]))
        return float(magnitudes.min()), float(magnitudes.max())

    def validate(self, grid: Grid) -> Tuple[float, float]:
        m_lo, m_hi = self.bounds(grid)
        if not (0.0 < m_lo <= m_hi < 1.0):
            raise WeightBoundError(m_lo, m_hi)
        return m_lo, m_hi


def constant_weight(c: complex, alpha: float = 0.0) -> WeightSpec:
    return WeightSpec(
        m=lambda x: np.full(np.shape(x), c, dtype=complex),
        dm=lambda x: np.zeros(np.shape(x), dtype=complex),
        alpha=alpha,
        kind="constant",
        params={"value": c},
    )


def gaussian_bump_weight(
    base: float = 0.5,
    amplitude: float = 0.2,
    width: float = 1.0,
    alpha: float = 0.0,
) -> WeightSpec:
    """m(x) = base + amplitude exp(-(x/width)^2)."""

    def m(x):
        return base + amplitude * np.exp(-((x / width) ** 2))

    def dm(x):
        return -2.0 * x / width**2 * amplitude * np.exp(-((x / width) ** 2))

    return WeightSpec(
        m=m,
        dm=dm,
        alpha=alpha,
        kind="gaussian_bump",
        params={"base": base, "amplitude": amplitude, "width": width},
    )


def tabulated_weight(x: Sequence[float], values: Sequence[complex], alpha: float = 0.0) -> WeightSpec:
    """Cubic-spline interpolant of tabulated m, held constant outside the table."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=complex)
    if x.shape != values.shape or x.size < 4:
        raise DimensionMismatchError(x.size, values.size, what="tabulated weight")
    real, imag = CubicSpline(x, values.real), CubicSpline(x, values.imag)
    lo, hi = x[0], x[-1]

    def m(t):
        t = np.clip(t, lo, hi)
        return real(t) + 1j * imag(t)

    def dm(t):
        inside = (t > lo) & (t < hi)
        tc = np.clip(t, lo, hi)
        return np.where(inside, real(tc, 1) + 1j * imag(tc, 1), 0.0)

    return WeightSpec(m=m, dm=dm, alpha=alpha, kind="tabulated", params={"points": int(x.size)})


# ---------------------------------------------------------------------------
# Grid operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridOperator:
    """Linear map on sampled functions; acts along the last axis of arrays."""

    name: str
    action: Callable[[np.ndarray], np.ndarray]

    def __call__(self, f: Union[GridFunction, np.ndarray]) -> Union[GridFunction, np.ndarray]:
        if isinstance(f, GridFunction):
            return GridFunction(self.action(f.samples), f.grid)
        return self.action(np.asarray(f, dtype=complex))

    def __matmul__(self, other: "GridOperator") -> "GridOperator":
        return GridOperator(f"{self.name}{other.name}", lambda s: self.action(other.action(s)))


def _translate(samples: np.ndarray, k: int) -> np.ndarray:
    """(T f)(x) = f(x - k h), zero filled on the first k nodes."""
    if k == 0:
        return np.array(samples, dtype=complex)
    out = np.zeros_like(samples, dtype=complex)
    out[..., k:] = samples[..., :-k]
    return out


def _translate_back(samples: np.ndarray, k: int) -> np.ndarray:
    """(T* f)(x) = f(x + k h), zero filled on the last k nodes."""
    if k == 0:
        return np.array(samples, dtype=complex)
    out = np.zeros_like(samples, dtype=complex)
    out[..., :-k] = samples[..., k:]
    return out


def derivative(samples: np.ndarray, h: float) -> np.ndarray:
    """4th-order central difference along the last axis, zero outside the grid."""
    padded = np.pad(samples, [(0, 0)] * (np.ndim(samples) - 1) + [(2, 2)])
    return (-padded[..., 4:] + 8 * padded[..., 3:-1] - 8 * padded[..., 1:-3] + padded[..., :-4]) / (12 * h)


def op_T(alpha: float, grid: Grid) -> GridOperator:
    k = grid.cells(alpha)
    return GridOperator("T", lambda s: _translate(s, k))


def op_T_star(alpha: float, grid: Grid) -> GridOperator:
    k = grid.cells(alpha)
    return GridOperator("T*", lambda s: _translate_back(s, k))


def op_K(weight: WeightSpec, grid: Grid) -> GridOperator:
    m = weight.values(grid.nodes)
    return GridOperator("K", lambda s: m * s)


def op_K_star(weight: WeightSpec, grid: Grid) -> GridOperator:
    m_conj = weight.values(grid.nodes).conj()
    return GridOperator("K*", lambda s: m_conj * s)


def op_X_star(weight: WeightSpec, grid: Grid) -> GridOperator:
    """X* = TK: (X* f)(x) = m(x - alpha) f(x - alpha)."""
    return op_T(weight.alpha, grid) @ op_K(weight, grid)


def op_X(weight: WeightSpec, grid: Grid) -> GridOperator:
    """X = K* T*: (X f)(x) = conj(m(x)) f(x + alpha)."""
    return op_K_star(weight, grid) @ op_T_star(weight.alpha, grid)


def x_star_x_multiplier(weight: WeightSpec, grid: Grid) -> np.ndarray:
    """Samples of |m(x - alpha)|^2, the multiplier of X*X."""
    m_shift = weight.shifted(grid)
    return (m_shift * m_shift.conj()).real


def x_x_star_multiplier(weight: WeightSpec, grid: Grid) -> np.ndarray:
    """Samples of |m(x)|^2, the multiplier of XX*."""
    m = weight.values(grid.nodes)
    return (m * m.conj()).real


def op_c(grid: Grid) -> GridOperator:
    x = grid.nodes
    return GridOperator("c", lambda s: (x * s + derivative(s, grid.h)) / SQRT2)


def op_c_star(grid: Grid) -> GridOperator:
    x = grid.nodes
    return GridOperator("c*", lambda s: (x * s - derivative(s, grid.h)) / SQRT2)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PBFamily:
    """
    Rows n = 0..N-1 of the four families:
        phi_n  = m(x-alpha) e_n(x-alpha)      psi_n  = e_n(x-alpha) / conj(m(x-alpha))
        phit_n = q(x) e_n(x)                  psit_n = e_n(x) / q(x)
    with q(x) = sqrt(1 - |m(x-alpha)|^2).
    """

    N: int
    grid: Grid
    weight: WeightSpec
    phi: np.ndarray
    psi: np.ndarray
    phit: np.ndarray
    psit: np.ndarray
    q: np.ndarray
    m_shifted: np.ndarray

    def state(self, family: str, n: int) -> GridFunction:
        rows = getattr(self, family)
        if not 0 <= n < self.N:
            raise IndexOutOfRangeError(n, f"0..{self.N - 1}")
        return GridFunction(rows[n], self.grid)

    def pair_gram(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Matrix of <left_m, right_n>."""
        return self.grid.h * left.conj() @ right.T

    def biorthogonality_defects(self) -> Tuple[float, float]:
        eye = np.eye(self.N)
        first = float(np.max(np.abs(self.pair_gram(self.phi, self.psi) - eye)))
        second = float(np.max(np.abs(self.pair_gram(self.phit, self.psit) - eye)))
        return first, second

    def cross_gram(self) -> np.ndarray:
        """<phi_m, psit_n>; no duality is claimed between the two sides."""
        return self.pair_gram(self.phi, self.psit)


def build_families(weight: WeightSpec, N: int, grid: Grid) -> PBFamily:
    """
    Sample the four families for n < N.

    Raises:
        WeightBoundError: If |m| leaves (0, 1) on the grid
        GridResolutionError: If the shifted Hermite states do not fit on the grid
        DegenerateWeightFunctionError: If |m| or q drop below the floor
    """
    weight.validate(grid)
    k = weight.cells(grid)
    _check_hermite_support(N - 1, grid, half_width=grid.L - k * grid.h)
    e = hermite_states(N, grid)

    m_shift = weight.shifted(grid)
    q = np.sqrt(1.0 - np.abs(m_shift) ** 2)
    _check_floor("|m(x-alpha)|", np.abs(m_shift))
    _check_floor("q", q)

    shifted_e = _translate(e, k)
    family = PBFamily(
        N=N,
        grid=grid,
        weight=weight,
        phi=m_shift * shifted_e,
        psi=shifted_e / m_shift.conj(),
        phit=q * e,
        psit=e / q,
        q=q,
        m_shifted=m_shift,
    )
    defects = family.biorthogonality_defects()
    logger.debug("pb_family_built", extra={"N": N, "P": grid.P, "k": k, "biorthogonality": max(defects)})
    return family


def _check_floor(which: str, values: np.ndarray) -> None:
    minimum = float(np.min(values))
    if minimum < settings.weight_floor:
        raise DegenerateWeightFunctionError(which, minimum)


def _project_out(samples: np.ndarray, e: np.ndarray, h: float) -> np.ndarray:
    return samples - (h * e @ samples) @ e


def parseval_residual(family: PBFamily, f: GridFunction) -> float:
    """|| f - sum_{n<N} (<phi_n, f> phi_n + <phit_n, f> phit_n) ||."""
    h = family.grid.h
    s = f.samples
    recon = (h * family.phi.conj() @ s) @ family.phi + (h * family.phit.conj() @ s) @ family.phit
    return grid_norm(s - recon, family.grid)


def parseval_tail_bound(family: PBFamily, f: GridFunction) -> float:
    """||(I - P_N) X f|| + ||(I - P_N) Q f||, P_N the projector onto span{e_n, n < N}."""
    grid = family.grid
    e = hermite_states(family.N, grid)
    Xf = op_X(family.weight, grid)(f.samples)
    Qf = family.q * f.samples
    tail_x = grid_norm(_project_out(Xf, e, grid.h), grid)
    tail_q = grid_norm(_project_out(Qf, e, grid.h), grid)
    return tail_x + tail_q


# ---------------------------------------------------------------------------
# Ladder operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LadderPair:
    lower: GridOperator
    raising: GridOperator
    derivative_source: str


@dataclass(frozen=True)
class LadderTolerance:
    """tol(n) = C h^4 max(n, 1)^(3/2) for one (P, L) profile."""

    C: float
    grid: Grid
    calibrated: bool = False

    def tol(self, n: int) -> float:
        return self.C * self.grid.h**4 * max(n, 1) ** 1.5


def ladder_phi(weight: WeightSpec, grid: Grid) -> LadderPair:
    """a_phi = c - (alpha + m'/m)/sqrt2 and b_phi = c* - (alpha - m'/m)/sqrt2, m evaluated at x - alpha."""
    m_shift = weight.shifted(grid)
    _check_floor("|m(x-alpha)|", np.abs(m_shift))
    dm_shift, source = weight.derivative_shifted(grid)
    log_derivative = dm_shift / m_shift
    lower_shift = (weight.alpha + log_derivative) / SQRT2
    raise_shift = (weight.alpha - log_derivative) / SQRT2
    c, c_star = op_c(grid), op_c_star(grid)
    return LadderPair(
        lower=GridOperator("a_phi", lambda s: c.action(s) - lower_shift * s),
        raising=GridOperator("b_phi", lambda s: c_star.action(s) - raise_shift * s),
        derivative_source=source,
    )


def ladder_tilde(weight: WeightSpec, grid: Grid) -> LadderPair:
    """a_phit = c - (q'/q)/sqrt2 and b_phit = c* + (q'/q)/sqrt2."""
    m_shift = weight.shifted(grid)
    q2 = 1.0 - np.abs(m_shift) ** 2
    _check_floor("q", np.sqrt(q2))
    dm_shift, source = weight.derivative_shifted(grid)
    q_log_derivative = -(m_shift.conj() * dm_shift).real / q2
    shift = q_log_derivative / SQRT2
    c, c_star = op_c(grid), op_c_star(grid)
    return LadderPair(
        lower=GridOperator("a_phit", lambda s: c.action(s) - shift * s),
        raising=GridOperator("b_phit", lambda s: c_star.action(s) + shift * s),
        derivative_source=source,
    )


def _side_rows(family: PBFamily, side: str) -> Tuple[np.ndarray, np.ndarray]:
    if side == "phi":
        return family.phi, family.psi
    if side == "tilde":
        return family.phit, family.psit
    raise ValueError(f"side must be 'phi' or 'tilde', got {side!r}")


def ladder_residuals(family: PBFamily, ladders: LadderPair, n: int, side: str = "phi") -> Tuple[float, float]:
    """(||a v_n - sqrt(n) v_{n-1}||, ||b v_n - sqrt(n+1) v_{n+1}||) with v the chosen side."""
    if not 0 <= n < family.N - 1:
        raise IndexOutOfRangeError(n, f"0..{family.N - 2}")
    rows, _ = _side_rows(family, side)
    grid = family.grid
    lowered = ladders.lower(rows[n])
    if n > 0:
        lowered = lowered - math.sqrt(n) * rows[n - 1]
    raised = ladders.raising(rows[n]) - math.sqrt(n + 1) * rows[n + 1]
    return grid_norm(lowered, grid), grid_norm(raised, grid)


@dataclass(frozen=True)
class NumberCheck:
    n: int
    phi: float
    tilde: float


def number_check(
    family: PBFamily,
    ladders: Optional[Tuple[LadderPair, LadderPair]] = None,
    n: int = 0,
) -> NumberCheck:
    """Relative residuals ||b a v_n - n v_n|| / ||v_n|| for both sides."""
    if not 0 <= n < family.N - 1:
        raise IndexOutOfRangeError(n, f"0..{family.N - 2}")
    if ladders is None:
        ladders = (ladder_phi(family.weight, family.grid), ladder_tilde(family.weight, family.grid))
    residuals = []
    for side, pair in zip(("phi", "tilde"), ladders):
        rows, _ = _side_rows(family, side)
        v = rows[n]
        number = pair.raising(pair.lower(v))
        residuals.append(grid_norm(number - n * v, family.grid) / grid_norm(v, family.grid))
    return NumberCheck(n=n, phi=residuals[0], tilde=residuals[1])


def ladder_span_matrices(
    family: PBFamily,
    ladders: LadderPair,
    side: str = "phi",
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Matrices of a and b in biorthogonal coordinates: A_kj = <psi_k, a phi_j>, B_kj = <psi_k, b phi_j>.

    A approximates the truncated lowering matrix and B its adjoint except in the
    last column. The ladders of the dual family act on the truncated span through
    the adjoint matrices A*, B*.
    """
    rows, duals = _side_rows(family, side)
    h = family.grid.h
    A = h * duals.conj() @ ladders.lower(rows).T
    B = h * duals.conj() @ ladders.raising(rows).T
    return A, B


def default_ladder_tolerance(grid: Grid) -> LadderTolerance:
    return LadderTolerance(settings.ladder_tolerance_constant, grid)


def calibrate_ladder_tolerance(grid: Grid, N: int, safety: Optional[float] = None) -> LadderTolerance:
    """
    Fix C from the constant-weight case (m = 0.6, alpha = 0), where every ladder
    relation is exact up to differentiation error.
    """
    safety = settings.ladder_safety_factor if safety is None else safety
    family = build_families(constant_weight(0.6), N, grid)
    pairs = {"phi": ladder_phi(family.weight, grid), "tilde": ladder_tilde(family.weight, grid)}
    ratio = 0.0
    for n in range(N - 1):
        scale = grid.h**4 * max(n, 1) ** 1.5
        for side, pair in pairs.items():
            ratio = max(ratio, max(ladder_residuals(family, pair, n, side)) / scale)
    C = max(safety * ratio, np.finfo(float).eps)
    logger.info("ladder_tolerance_calibrated", extra={"P": grid.P, "L": grid.L, "N": N, "C": C})
    return LadderTolerance(C, grid, calibrated=True)


def convergence_ratio(residual_coarse: float, residual_fine: float) -> float:
    """Error ratio between a grid and its refinement; about 16 for a 4th-order scheme."""
    if residual_fine == 0.0:
        return math.inf
    return residual_coarse / residual_fine


def ladder_convergence_ratio(
    weight: WeightSpec,
    N: int,
    n: int,
    grid: Grid,
    side: str = "phi",
) -> Tuple[float, float, float]:
    """(coarse residual, fine residual, ratio) of the lowering relation at order n under P -> 2P - 1."""
    residuals = []
    for g in (grid, grid.refined()):
        family = build_families(weight, N, g)
        pair = ladder_phi(weight, g) if side == "phi" else ladder_tilde(weight, g)
        residuals.append(ladder_residuals(family, pair, n, side)[0])
    return residuals[0], residuals[1], convergence_ratio(*residuals)


# ---------------------------------------------------------------------------
# Split Hamiltonian
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SplitHamiltonian:
    """H = H1 + H2 with H1 = sum E_n <phi_n, .> phi_n and H2 = sum Et_n <phit_n, .> phit_n."""

    family: PBFamily
    E_phi: np.ndarray
    E_tilde: np.ndarray

    def _part(self, rows: np.ndarray, E: np.ndarray, samples: np.ndarray) -> np.ndarray:
        coefficients = self.family.grid.h * rows.conj() @ samples.T
        return ((E[:, None] if coefficients.ndim == 2 else E) * coefficients).T @ rows

    def apply_parts(self, f: GridFunction) -> Tuple[GridFunction, GridFunction]:
        grid = self.family.grid
        h1 = self._part(self.family.phi, self.E_phi, f.samples)
        h2 = self._part(self.family.phit, self.E_tilde, f.samples)
        return GridFunction(h1, grid), GridFunction(h2, grid)

    def apply(self, f: GridFunction) -> GridFunction:
        h1, h2 = self.apply_parts(f)
        return h1 + h2

    def dual_consistency_defects(self) -> Tuple[float, float]:
        """max |<psi_k, H1 psi_j> - E_j delta_kj| and the same on the tilde side."""
        family = self.family
        defects = []
        for rows, duals, E in (
            (family.phi, family.psi, self.E_phi),
            (family.phit, family.psit, self.E_tilde),
        ):
            applied = self._part(rows, E, duals)
            G = family.pair_gram(duals, applied)
            defects.append(float(np.max(np.abs(G - np.diag(E)))))
        return defects[0], defects[1]

    def span_matrix(self) -> np.ndarray:
        """<Phi_k, H Phi_l> over the union family Phi = phi + phit."""
        rows = np.vstack([self.family.phi, self.family.phit])
        applied = self._part(self.family.phi, self.E_phi, rows) + self._part(self.family.phit, self.E_tilde, rows)
        return self.family.pair_gram(rows, applied)

    def hermitian_defect(self) -> float:
        G = self.span_matrix()
        return float(np.max(np.abs(G - G.conj().T)))


def split_hamiltonian(
    family: PBFamily,
    E_phi: Sequence[float],
    E_tilde: Sequence[float],
) -> SplitHamiltonian:
    """
    Args:
        family: The four families on a grid
        E_phi: Weights E_n of the phi side (n < N)
        E_tilde: Weights E_{-(n+1)} of the phit side (n < N)
    """
    E_phi = np.asarray(E_phi, dtype=float)
    E_tilde = np.asarray(E_tilde, dtype=float)
    if E_phi.shape != (family.N,):
        raise DimensionMismatchError(family.N, E_phi.size, what="phi-side weights")
    if E_tilde.shape != (family.N,):
        raise DimensionMismatchError(family.N, E_tilde.size, what="tilde-side weights")
    return SplitHamiltonian(family, E_phi, E_tilde)
