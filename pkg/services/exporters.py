"""
Export Service
Handles exporting spectra, per-order defect tables and run reports.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from core.deterministic.hamiltonian import SpectrumReport
from services.storage import StorageService

SPECTRUM_COLUMNS = ["mu", "multiplicity", "residual"]
CC_SPECTRUM_COLUMNS = ["block", "lambda", "type", "residual"]
PSEUDO_BOSON_COLUMNS = [
    "n",
    "biorthogonality_phi",
    "biorthogonality_tilde",
    "lower_residual",
    "raise_residual",
    "number_residual",
    "tolerance",
]


class ExportService:
    """Handles exporting computation results."""

    @staticmethod
    def spectrum_rows(report: SpectrumReport, rtol: float = 1e-9) -> List[Dict[str, Any]]:
        return [
            {"mu": mu, "multiplicity": multiplicity, "residual": residual}
            for mu, multiplicity, residual in report.grouped(rtol)
        ]

    @staticmethod
    def export_spectrum_csv(report: SpectrumReport, output_path: Path, rtol: float = 1e-9) -> str:
        """
        Export a spectrum as rows (mu, multiplicity, residual), ascending in mu.

        Args:
            report: Spectrum to export
            output_path: Output file path
            rtol: Relative tolerance for merging repeated eigenvalues

        Returns:
            Path to exported file
        """
        df = pd.DataFrame(ExportService.spectrum_rows(report, rtol), columns=SPECTRUM_COLUMNS)
        return StorageService.write_csv(df, output_path)

    @staticmethod
    def cc_spectrum_rows(report: SpectrumReport) -> List[Dict[str, Any]]:
        blocks = report.blocks or (1,) * report.eigenvalues.size
        rows = [
            {"block": block, "lambda": float(value), "type": kind, "residual": float(residual)}
            for block, value, kind, residual in zip(blocks, report.eigenvalues, report.kinds, report.residuals)
        ]
        # deterministic order: by block, then eigenvalue
        return sorted(rows, key=lambda row: (row["block"], row["lambda"]))

    @staticmethod
    def export_cc_spectrum_csv(report: SpectrumReport, output_path: Path) -> str:
        """
        Export a block or direct-sum spectrum as rows (block, lambda, type, residual).

        type is "secular" for roots of the secular equation and "top" for E_{n+1}.
        """
        df = pd.DataFrame(ExportService.cc_spectrum_rows(report), columns=CC_SPECTRUM_COLUMNS)
        return StorageService.write_csv(df, output_path)

    @staticmethod
    def export_table_csv(
        rows: Sequence[Dict[str, Any]],
        output_path: Path,
        columns: Optional[List[str]] = None,
        sort_by: Optional[List[str]] = None,
    ) -> str:
        """Export plain rows, optionally sorted for a deterministic order."""
        df = pd.DataFrame(list(rows), columns=columns)
        if sort_by and not df.empty:
            df = df.sort_values(sort_by, kind="mergesort").reset_index(drop=True)
        return StorageService.write_csv(df, output_path)

    @staticmethod
    def export_report_json(report: Dict[str, Any], output_path: Path) -> str:
        """
        Export a run report as JSON.

        Returns:
            Path to exported file
        """
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w") as f:
            json.dump(report, f, indent=2, default=str)
        return str(output_path)
