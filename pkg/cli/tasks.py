"""
Task handlers for the experiment runner.

Each handler takes a validated config and a seeded Generator and returns a
TaskOutcome: named checks {name, value, tolerance, passed}, plain results and
the CSV tables to export. execute() wraps a handler with run folders, report
and lineage.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from functools import partial
from datetime import datetime, timezone

UTC = timezone.utc
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from cli.models import (
    CCLaddersConfig,
    CCSpectrumConfig,
    FrameSourceMixin,
    FrameVerifyConfig,
    NaimarkConfig,
    PseudoBosonConfig,
    RieszPairsConfig,
    SpectrumConfig,
    WeightFunctionSpec,
)
from config.settings import settings
from core.deterministic.casazza_christensen import (
    CCBlock,
    CCFamily,
    cc_b_operator,
    cc_dilation,
    cc_family_frame,
    cc_family_spectrum,
    cc_frame,
    direct_sum_hamiltonian,
    ladder_a,
    ladder_action_on_frame,
    ranked_family,
    secular_roots,
    sqrt_bounded_family,
    truncated_commutator_defect,
    vertical_defects,
)
from core.deterministic.frame_core import (
    Frame,
    excess,
    gram,
    naimark_dilate,
    parseval_defect,
    random_parseval_frame,
    range_projector,
    require_parseval,
    riesz_pair_families,
)
from core.deterministic.hamiltonian import (
    as_weights,
    assemble,
    b_operator_matrix,
    classify_boundedness,
    compression_defect,
    dense_spectrum,
    energy_split_defect,
    point_spectrum_certificate,
    quadratic_form,
    quasi_eigenpair_check,
    riesz_split_assemble,
)
from core.deterministic.pseudo_boson import (
    Grid,
    GridFunction,
    WeightSpec,
    build_families,
    calibrate_ladder_tolerance,
    constant_weight,
    default_ladder_tolerance,
    gaussian_bump_weight,
    hermite_state,
    ladder_convergence_ratio,
    ladder_phi,
    ladder_residuals,
    ladder_tilde,
    number_check,
    op_X,
    op_X_star,
    parseval_residual,
    parseval_tail_bound,
    split_hamiltonian,
    tabulated_weight,
    x_star_x_multiplier,
)
from core.exceptions import InvariantViolationError
from services.exporters import PSEUDO_BOSON_COLUMNS, ExportService
from services.registry import RunRegistry
from services.storage import StorageService

logger = logging.getLogger(__name__)

BIORTHOGONALITY_TOL = 1e-9
PARSEVAL_TAIL_SLACK = 1e-8
TWO_GRID_RANGE = (12.0, 20.0)

DILATION_COLUMNS = ["trial", "J", "dim", "m", "gram_defect", "psi_parseval_defect", "excess", "embedding_defect"]
QUASI_COLUMNS = ["label", "E", "is_eigenpair", "residual", "eigen_residual", "finiteness_sum"]
LADDER_COLUMNS = ["n", "commutator_defect", "co_isometry_defect", "idempotency_defect", "rank", "action_defect"]


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    lower: Optional[float] = None

    @classmethod
    def at_most(cls, name: str, value: float, tolerance: float) -> "Check":
        value = float(value)
        return cls(name, value, float(tolerance), bool(np.isfinite(value) and value <= tolerance))

    @classmethod
    def within(cls, name: str, value: float, lower: float, upper: float) -> "Check":
        value = float(value)
        return cls(name, value, float(upper), bool(lower <= value <= upper), lower=float(lower))

    def to_dict(self) -> Dict[str, Any]:
        data = {"name": self.name, "value": self.value, "tolerance": self.tolerance, "passed": self.passed}
        if self.lower is not None:
            data["lower"] = self.lower
        return data


@dataclass
class TaskOutcome:
    checks: List[Check] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Tuple[List[Dict[str, Any]], List[str]]] = field(default_factory=dict)
    inputs: List[str] = field(default_factory=list)
    documents: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    # tables written by a dedicated exporter: name -> export(path) -> path
    exports: Dict[str, Callable[[Path], str]] = field(default_factory=dict)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    @property
    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    @property
    def passed(self) -> bool:
        return not self.failed

    def raise_for_failures(self) -> None:
        if self.failed:
            raise InvariantViolationError(self.failed)


@dataclass
class RunResult:
    run_id: str
    run_path: Path
    report: Dict[str, Any]
    outcome: TaskOutcome


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _resolve_frame(config: FrameSourceMixin, rng: np.random.Generator, outcome: TaskOutcome) -> Frame:
    if config.frame_file is not None:
        outcome.inputs.append(str(config.frame_file))
        return StorageService.read_frame(config.frame_file)
    if config.frame is not None:
        return StorageService.frame_from_document(config.frame.model_dump(exclude_none=True))
    spec = config.random
    return random_parseval_frame(spec.dim, spec.dim + spec.excess, rng)


def _unit_probes(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    probes = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return probes / np.linalg.norm(probes, axis=1, keepdims=True)


def _label(value: Any) -> Any:
    return tuple(value) if isinstance(value, list) else value


def _json_label(label: Any) -> Any:
    return list(label) if isinstance(label, tuple) else label


# ---------------------------------------------------------------------------
# frame-verify
# ---------------------------------------------------------------------------


def run_frame_verify(config: FrameVerifyConfig, rng: np.random.Generator) -> TaskOutcome:
    outcome = TaskOutcome()
    frame = _resolve_frame(config, rng, outcome)
    defect = parseval_defect(frame)
    outcome.results.update(J=frame.size, dim=frame.dim, parseval_defect=defect)
    outcome.documents["frame.json"] = StorageService.frame_to_document(frame)
    outcome.add(Check.at_most("parseval_defect", defect, settings.parseval_tol))

    norms = np.linalg.norm(frame.matrix, axis=1)
    outcome.add(Check.at_most("member_norm_above_one", max(float(norms.max()) - 1.0, 0.0), settings.parseval_tol))
    if defect > settings.parseval_tol:
        # the remaining identities presuppose a Parseval frame
        return outcome

    outcome.results["excess"] = excess(frame)
    P = range_projector(frame)
    outcome.add(Check.at_most("range_projector_trace_mismatch", abs(float(np.trace(P).real) - frame.dim), 1e-8))

    probes = _unit_probes(rng, config.random_vectors, frame.dim)
    coefficients = probes @ frame.matrix.conj().T
    energy = np.sum(np.abs(coefficients) ** 2, axis=1)
    outcome.add(Check.at_most("isometry_defect", float(np.max(np.abs(energy - 1.0))), settings.parseval_tol))
    reconstructed = coefficients @ frame.matrix
    outcome.add(
        Check.at_most(
            "reconstruction_defect",
            float(np.max(np.linalg.norm(reconstructed - probes, axis=1))),
            settings.parseval_tol,
        )
    )

    if outcome.results["excess"] > 0:
        sequences = rng.standard_normal((config.random_vectors, frame.size)).astype(complex)
        kernel = sequences - sequences @ P.T
        kernel = kernel / np.linalg.norm(kernel, axis=1, keepdims=True)
        leakage = float(np.max(np.linalg.norm(kernel @ frame.matrix, axis=1)))
        outcome.add(Check.at_most("synthesis_kernel_leakage", leakage, settings.parseval_tol))
    return outcome


# ---------------------------------------------------------------------------
# naimark
# ---------------------------------------------------------------------------


def run_naimark(config: NaimarkConfig, rng: np.random.Generator) -> TaskOutcome:
    outcome = TaskOutcome()
    if config.random is not None:
        spec = config.random
        frames = [random_parseval_frame(spec.dim, spec.dim + spec.excess, rng) for _ in range(config.trials)]
    else:
        frames = [_resolve_frame(config, rng, outcome)]

    rows = []
    for trial, frame in enumerate(frames, start=1):
        require_parseval(frame)
        dilation = naimark_dilate(frame, rng)
        h_gram = gram(dilation.h)
        rows.append(
            {
                "trial": trial,
                "J": frame.size,
                "dim": frame.dim,
                "m": dilation.m,
                "gram_defect": float(np.max(np.abs(h_gram - np.eye(frame.size)))),
                "psi_parseval_defect": parseval_defect(dilation.psi) if dilation.m else 0.0,
                "excess": excess(frame),
                "embedding_defect": float(np.max(np.abs(dilation.h.matrix[:, : frame.dim] - frame.matrix))),
            }
        )

    outcome.add(Check.at_most("dilation_gram_defect", max(r["gram_defect"] for r in rows), settings.gram_tol))
    outcome.add(
        Check.at_most("complement_parseval_defect", max(r["psi_parseval_defect"] for r in rows), settings.parseval_tol)
    )
    outcome.add(Check.at_most("embedding_defect", max(r["embedding_defect"] for r in rows), 0.0))
    outcome.add(Check.at_most("complement_dim_mismatch", sum(r["m"] != r["excess"] for r in rows), 0))
    outcome.results.update(trials=len(rows), max_gram_defect=max(r["gram_defect"] for r in rows))
    outcome.tables["dilation.csv"] = (rows, DILATION_COLUMNS)
    return outcome


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def run_spectrum(config: SpectrumConfig, rng: np.random.Generator) -> TaskOutcome:
    outcome = TaskOutcome()
    frame = _resolve_frame(config, rng, outcome)
    require_parseval(frame)
    E = np.asarray(config.E, dtype=float) if config.E is not None else rng.uniform(-5.0, 5.0, frame.size)
    weights = as_weights(E)

    H = assemble(frame, weights)
    scale = max(H.norm(), 1.0)
    report = dense_spectrum(H)
    outcome.add(Check.at_most("hermitian_defect", H.hermitian_defect(), 1e-14 * scale))
    outcome.add(Check.at_most("dense_eigen_residual", report.max_residual, 1e-10 * scale))

    probes = _unit_probes(rng, 20, frame.dim)
    imaginary = max(abs(quadratic_form(H, f).imag) for f in probes)
    outcome.add(Check.at_most("quadratic_form_imaginary_part", imaginary, 1e-12 * scale))

    grouped = report.grouped(1e-9)
    eigenvalues = np.array([mu for mu, _, _ in grouped])
    missing = sum(point_spectrum_certificate(frame, weights, mu) is None for mu in eigenvalues)
    outcome.add(Check.at_most("uncertified_eigenvalues", missing, 0))
    off_spectrum = [
        mu + sign * config.scan_offset
        for mu in eigenvalues
        for sign in (-1.0, 1.0)
        if np.min(np.abs(eigenvalues - (mu + sign * config.scan_offset))) > 1e-4
    ]
    false_positives = sum(point_spectrum_certificate(frame, weights, mu) is not None for mu in off_spectrum)
    outcome.add(Check.at_most("false_certificates", false_positives, 0))

    dilation = naimark_dilate(frame, rng)
    quasi_rows = []
    for label, E_j in zip(frame.labels, weights.E):
        quasi = quasi_eigenpair_check(dilation, weights, label)
        quasi_rows.append(
            {
                "label": _json_label(label),
                "E": float(E_j),
                "is_eigenpair": quasi.is_eigenpair,
                "residual": quasi.residual,
                "eigen_residual": quasi.eigen_residual,
                "finiteness_sum": quasi.finiteness_sum,
            }
        )
    mismatch = max(abs(row["residual"] - row["eigen_residual"]) for row in quasi_rows)
    outcome.add(Check.at_most("quasi_eigenpair_consistency", mismatch, 1e-10 * scale))

    outcome.add(Check.at_most("compression_defect", compression_defect(dilation, weights), 1e-12 * scale))
    weight_scale = max(weights.sup_abs, 1.0)
    split = max(energy_split_defect(dilation, weights, f) for f in probes[:5])
    outcome.add(Check.at_most("energy_split_defect", split, 1e-10 * weight_scale**2))

    if config.riesz_split is not None:
        J0 = [_label(label) for label in config.riesz_split.J0]
        J1 = [_label(label) for label in config.riesz_split.J1]
        A = riesz_split_assemble(frame, weights, J0, J1)
        outcome.add(Check.at_most("riesz_split_defect", float(np.linalg.norm(A.matrix - H.matrix, 2)), 1e-10 * scale))

    boundedness = classify_boundedness(weights, config.declared_tail)
    outcome.results.update(
        J=frame.size,
        dim=frame.dim,
        eigenvalues=[float(mu) for mu in eigenvalues],
        quasi_eigenpairs=sum(row["is_eigenpair"] for row in quasi_rows),
        b_norm=b_operator_matrix(dilation, weights).norm,
        sup_abs=boundedness.sup_abs,
        operator_class=boundedness.operator_class,
    )
    outcome.documents["hamiltonian.json"] = StorageService.hamiltonian_to_document(H)
    outcome.documents["spectrum.json"] = StorageService.spectrum_to_document(report)
    outcome.exports["spectrum.csv"] = partial(ExportService.export_spectrum_csv, report)
    outcome.tables["quasi_eigenpairs.csv"] = (quasi_rows, QUASI_COLUMNS)
    return outcome


# ---------------------------------------------------------------------------
# cc-spectrum
# ---------------------------------------------------------------------------


def _cc_family(config: CCSpectrumConfig) -> CCFamily:
    if config.family == "ranked":
        return ranked_family(config.N_blocks)
    if config.family == "sqrt_bounded":
        return sqrt_bounded_family(config.N_blocks)
    return CCFamily(tuple(CCBlock(spec.n, np.asarray(spec.E, dtype=float)) for spec in config.block_specs()))


def run_cc_spectrum(config: CCSpectrumConfig, rng: np.random.Generator) -> TaskOutcome:
    outcome = TaskOutcome()
    family = _cc_family(config)
    report = cc_family_spectrum(family)
    H = direct_sum_hamiltonian(family)
    scale = max(H.norm(), 1.0)
    dense = dense_spectrum(H)

    outcome.add(Check.at_most("family_parseval_defect", parseval_defect(cc_family_frame(family)), settings.parseval_tol))
    outcome.add(
        Check.at_most(
            "secular_vs_dense",
            float(np.max(np.abs(np.sort(report.eigenvalues) - dense.eigenvalues))),
            1e-9 * scale,
        )
    )
    outcome.add(Check.at_most("eigenvector_formula_residual", report.max_residual, 1e-8 * scale))

    broken = sum(
        not secular_roots(block.E[: block.n]).interlaces() for block in family.blocks if block.n >= 2
    )
    outcome.add(Check.at_most("interlacing_violations", broken, 0))
    top_failures = sum(
        not quasi_eigenpair_check(cc_dilation(block.n), block.E, block.n + 1).is_eigenpair for block in family.blocks
    )
    outcome.add(Check.at_most("top_quasi_eigenpair_failures", top_failures, 0))

    b_report = cc_b_operator(family)
    outcome.results.update(
        blocks=len(family.blocks),
        dim=family.dim,
        b_norm=b_report.norm,
        sup_ratio=b_report.sup_ratio,
        max_residual=report.max_residual,
    )
    outcome.exports["cc_spectrum.csv"] = partial(ExportService.export_cc_spectrum_csv, report)
    return outcome


# ---------------------------------------------------------------------------
# cc-ladders
# ---------------------------------------------------------------------------


def run_cc_ladders(config: CCLaddersConfig, rng: np.random.Generator) -> TaskOutcome:
    outcome = TaskOutcome()
    rows = []
    for n in range(1, config.n_max + 1):
        co_isometry, idempotency, rank = vertical_defects(n)
        a, frame = ladder_a(n), cc_frame(n)
        action = max(
            float(np.max(np.abs(ladder_action_on_frame(n, j).coeffs - a @ frame.matrix[j - 1])))
            for j in range(1, n + 2)
        )
        rows.append(
            {
                "n": n,
                "commutator_defect": truncated_commutator_defect(n),
                "co_isometry_defect": co_isometry,
                "idempotency_defect": idempotency,
                "rank": rank,
                "action_defect": action,
            }
        )

    outcome.add(Check.at_most("commutator_defect", max(r["commutator_defect"] for r in rows), 1e-14))
    outcome.add(Check.at_most("co_isometry_defect", max(r["co_isometry_defect"] for r in rows), 1e-14))
    outcome.add(Check.at_most("idempotency_defect", max(r["idempotency_defect"] for r in rows), 1e-14))
    outcome.add(Check.at_most("rank_mismatch", sum(r["rank"] != r["n"] for r in rows), 0))
    outcome.add(Check.at_most("ladder_action_defect", max(r["action_defect"] for r in rows), 1e-13))
    outcome.results["n_max"] = config.n_max
    outcome.tables["ladders.csv"] = (rows, LADDER_COLUMNS)
    return outcome


# ---------------------------------------------------------------------------
# pseudo-boson
# ---------------------------------------------------------------------------


def build_weight(spec: WeightFunctionSpec, alpha: float) -> WeightSpec:
    if spec.kind == "constant":
        return constant_weight(spec.value, alpha)
    if spec.kind == "gaussian_bump":
        return gaussian_bump_weight(spec.base, spec.amplitude, spec.width, alpha)
    return tabulated_weight(spec.x, spec.values, alpha)


def _probe_functions(grid: Grid, alpha: float) -> List[GridFunction]:
    x = grid.nodes
    ground = hermite_state(0, grid)
    mixture = np.exp(-((x - alpha - 1.0) ** 2) / 2) + 0.5 * np.exp(-((x + 1.0) ** 2))
    mixture = GridFunction(mixture.astype(complex), grid)
    shifted = GridFunction.from_callable(lambda t: math.pi**-0.25 * np.exp(-((t - alpha) ** 2) / 2), grid)
    return [ground, shifted, mixture * (1.0 / mixture.norm())]


def run_pseudo_boson(config: PseudoBosonConfig, rng: np.random.Generator) -> TaskOutcome:
    outcome = TaskOutcome()
    grid = Grid(config.grid.L, config.grid.P)
    weight = build_weight(config.m, config.alpha_cells * grid.h)
    N = config.N
    family = build_families(weight, N, grid)

    biorth_phi, biorth_tilde = family.biorthogonality_defects()
    outcome.add(Check.at_most("biorthogonality_phi", biorth_phi, BIORTHOGONALITY_TOL))
    outcome.add(Check.at_most("biorthogonality_tilde", biorth_tilde, BIORTHOGONALITY_TOL))

    excesses = []
    for f in _probe_functions(grid, weight.alpha):
        excesses.append(parseval_residual(family, f) - parseval_tail_bound(family, f))
    outcome.add(Check.at_most("parseval_residual_above_tail_bound", max(excesses), PARSEVAL_TAIL_SLACK))

    k = weight.cells(grid)
    f = _probe_functions(grid, weight.alpha)[2].samples
    composed = op_X_star(weight, grid)(op_X(weight, grid)(f))
    closed_form = x_star_x_multiplier(weight, grid) * f
    identity_defect = float(np.max(np.abs(composed[k:] - closed_form[k:])))
    outcome.add(Check.at_most("x_star_x_identity", identity_defect, 1e-15 * max(1.0, float(np.max(np.abs(f))))))

    tolerance = calibrate_ladder_tolerance(grid, N) if config.calibrate else default_ladder_tolerance(grid)
    pairs = {"phi": ladder_phi(weight, grid), "tilde": ladder_tilde(weight, grid)}
    rows = []
    worst = 0.0
    for n in range(N - 1):
        lower_phi, raise_phi = ladder_residuals(family, pairs["phi"], n, "phi")
        lower_tilde, raise_tilde = ladder_residuals(family, pairs["tilde"], n, "tilde")
        number = number_check(family, (pairs["phi"], pairs["tilde"]), n)
        tol = tolerance.tol(n)
        lower, raised = max(lower_phi, lower_tilde), max(raise_phi, raise_tilde)
        worst = max(worst, lower / tol, raised / tol)
        biorth_row_phi = family.pair_gram(family.phi[n : n + 1], family.psi)[0] - np.eye(N)[n]
        biorth_row_tilde = family.pair_gram(family.phit[n : n + 1], family.psit)[0] - np.eye(N)[n]
        rows.append(
            {
                "n": n,
                "biorthogonality_phi": float(np.max(np.abs(biorth_row_phi))),
                "biorthogonality_tilde": float(np.max(np.abs(biorth_row_tilde))),
                "lower_residual": lower,
                "raise_residual": raised,
                "number_residual": max(number.phi, number.tilde),
                "tolerance": tol,
            }
        )
    outcome.add(Check.at_most("ladder_residual_over_tolerance", worst, 1.0))

    if config.two_grid_order is not None:
        coarse, fine, ratio = ladder_convergence_ratio(weight, N, config.two_grid_order, grid)
        outcome.add(Check.within("two_grid_convergence_ratio", ratio, *TWO_GRID_RANGE))
        outcome.results["two_grid"] = {"coarse": coarse, "fine": fine, "ratio": ratio}

    # E_n = n on the phi side and E_{-(n+1)} = n on the tilde side
    energies = np.arange(N, dtype=float)
    H = split_hamiltonian(family, energies, energies)
    consistency = max(H.dual_consistency_defects())
    outcome.add(Check.at_most("split_dual_consistency", consistency, 1e-8 * N))
    outcome.add(Check.at_most("split_span_hermitian_defect", H.hermitian_defect(), 1e-9 * N))

    m_lo, m_hi = weight.bounds(grid)
    outcome.results.update(
        grid={"L": grid.L, "P": grid.P, "h": grid.h},
        alpha=weight.alpha,
        m_bounds=[m_lo, m_hi],
        derivative_source=pairs["phi"].derivative_source,
        ladder_tolerance_constant=tolerance.C,
        ladder_tolerance_calibrated=tolerance.calibrated,
    )
    outcome.tables["pseudo_boson.csv"] = (rows, PSEUDO_BOSON_COLUMNS)
    return outcome


# ---------------------------------------------------------------------------
# riesz-pairs
# ---------------------------------------------------------------------------


def _riesz_pairs_operator(config: RieszPairsConfig, rng: np.random.Generator) -> np.ndarray:
    if config.X is not None:
        return StorageService.decode_complex(config.X, "$.X")
    if config.scale is not None:
        return config.scale * np.eye(config.dim, dtype=complex)
    G = rng.standard_normal((config.dim, config.dim)) + 1j * rng.standard_normal((config.dim, config.dim))
    sigma = linalg.svdvals(G)
    # contractive: ||X|| = random_norm; expansive: smallest singular value = random_norm
    return G * (config.random_norm / (sigma[0] if config.random_norm < 1.0 else sigma[-1]))


def run_riesz_pairs(config: RieszPairsConfig, rng: np.random.Generator) -> TaskOutcome:
    outcome = TaskOutcome()
    X = _riesz_pairs_operator(config, rng)
    families = riesz_pair_families(X)
    union_defect = parseval_defect(families.union)
    first, second = families.biorthogonality_defects()
    outcome.add(Check.at_most("union_parseval_defect", union_defect, settings.parseval_tol))
    outcome.add(Check.at_most("riesz_biorthogonality", first, settings.parseval_tol))
    outcome.add(Check.at_most("complement_biorthogonality", second, settings.parseval_tol))
    singular = linalg.svdvals(X)
    outcome.results.update(
        branch=families.branch.value,
        dim=X.shape[0],
        singular_value_range=[float(singular[-1]), float(singular[0])],
        union_parseval_defect=union_defect,
    )
    return outcome


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

HANDLERS: Dict[str, Callable[[Any, np.random.Generator], TaskOutcome]] = {
    "frame-verify": run_frame_verify,
    "naimark": run_naimark,
    "spectrum": run_spectrum,
    "cc-spectrum": run_cc_spectrum,
    "cc-ladders": run_cc_ladders,
    "pseudo-boson": run_pseudo_boson,
    "riesz-pairs": run_riesz_pairs,
    "prop15": run_riesz_pairs,
}


def execute(config, out_dir: Optional[Path] = None, seed: Optional[int] = None) -> RunResult:
    """
    Run one task and write report.json, its CSV tables and lineage.json.

    Args:
        config: Validated experiment config
        out_dir: Output directory (overrides config.output and settings.output_dir)
        seed: Seed (overrides config.seed and settings.default_seed)

    Returns:
        RunResult with the report body and the run folder
    """
    seed = seed if seed is not None else (config.seed if config.seed is not None else settings.default_seed)
    out_dir = out_dir if out_dir is not None else config.output
    config_echo = config.model_dump(mode="json", exclude_none=True)

    logger.info("task_start", extra={"task": config.task, "seed": seed})
    start_time = time.time()
    outcome = HANDLERS[config.task](config, np.random.default_rng(seed))
    duration_ms = (time.time() - start_time) * 1000

    registry = RunRegistry(out_dir)
    run_id = registry.create_run(config.task, config_echo, seed)
    run_path = registry.get_run_path(run_id)

    outputs = []
    for name, (rows, columns) in outcome.tables.items():
        outputs.append(ExportService.export_table_csv(rows, run_path / name, columns=columns))
    for name, export in outcome.exports.items():
        outputs.append(export(run_path / name))
    for name, document in outcome.documents.items():
        StorageService.write_json(document, run_path / name)
        outputs.append(str(run_path / name))

    report = {
        "software": {"name": settings.software_name, "version": settings.software_version},
        "run_id": run_id,
        "task": config.task,
        "seed": seed,
        "config": config_echo,
        "passed": outcome.passed,
        "failed_invariants": outcome.failed,
        "checks": [check.to_dict() for check in outcome.checks],
        "results": outcome.results,
        "tables": sorted([*outcome.tables, *outcome.exports]),
        "documents": sorted(outcome.documents),
        "generated_at": datetime.now(UTC).isoformat(),
    }
    if settings.analysis_timing:
        report["timing"] = {"duration_ms": duration_ms}
    outputs.append(ExportService.export_report_json(report, run_path / "report.json"))

    registry.append_lineage_step(
        run_id,
        config.task,
        inputs=outcome.inputs,
        outputs=[Path(p).name for p in outputs],
        params=config_echo,
        metrics={"passed": outcome.passed, "failed_invariants": outcome.failed},
    )
    logger.info(
        "task_complete",
        extra={"task": config.task, "run_id": run_id, "passed": outcome.passed, "duration_ms": duration_ms},
    )
    return RunResult(run_id=run_id, run_path=run_path, report=report, outcome=outcome)
