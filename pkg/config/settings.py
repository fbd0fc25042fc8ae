"""
Application Settings
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path


class Settings(BaseSettings):
    """Toolkit configuration: numerical tolerances, defaults and output locations."""

    # Software identity (echoed into every report)
    software_name: str = "parseval-hamiltonians"
    software_version: str = "0.1.0"

    # Storage Settings
    output_dir: Path = Path("storage/runs")

    # Logging
    log_level: str = "INFO"

    # Frame tolerances
    rank_rtol: float = 1e-10  # singular values below rtol * sigma_max count as zero
    parseval_tol: float = 1e-10
    projector_tol: float = 1e-12
    sqrt_floor: float = 1e-12  # eigenvalue floor for Hermitian square roots
    gram_tol: float = 1e-12

    # Hamiltonian tolerances
    certificate_rtol: float = 1e-9
    eigvec_tol: float = 1e-8
    quasi_eig_tol: float = 1e-9
    riesz_cond_max: float = 1e8
    divergence_exponent_threshold: float = 0.05

    # Secular solver
    secular_rtol: float = 1e-13
    degenerate_gap_rtol: float = 1e-10
    secular_max_iterations: int = 200

    # Grid / pseudo-boson settings
    hermite_tail_margin: float = 6.0
    min_grid_points: int = 64
    weight_floor: float = 1e-8
    alignment_rtol: float = 1e-9
    ladder_tolerance_constant: float = 20.0
    ladder_safety_factor: float = 10.0

    # Randomised suites
    default_seed: int = 0

    # Performance Settings
    analysis_timing: bool = False

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="FRAMES_",
        case_sensitive=False,
    )


# Singleton instance
settings = Settings()
