"""
Storage Service
Handles file I/O: JSON documents, CSV tables, the complex-number codec and
frame/Hamiltonian documents.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from core.deterministic.frame_core import Frame
from core.deterministic.hamiltonian import FrameHamiltonian, SpectrumReport
from services.exceptions import DocumentFormatError


class StorageService:
    """Handles storage operations for frames, reports and tables."""

    @staticmethod
    def read_json(file_path: Union[str, Path]) -> Any:
        with open(file_path, "r") as f:
            return json.load(f)

    @staticmethod
    def write_json(data: Any, file_path: Union[str, Path]) -> str:
        """
        Write data as indented JSON.

        Returns:
            SHA256 checksum of the file
        """
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w") as f:
            json.dump(data, f, indent=2, default=str)
        return StorageService.calculate_checksum(file_path)

    @staticmethod
    def read_csv(file_path: Union[str, Path], **kwargs) -> pd.DataFrame:
        return pd.read_csv(file_path, **kwargs)

    @staticmethod
    def write_csv(df: pd.DataFrame, file_path: Union[str, Path], **kwargs) -> str:
        """
        Write DataFrame to CSV.

        Returns:
            Path to written file
        """
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(file_path, index=False, **kwargs)
        return str(file_path)

    @staticmethod
    def calculate_checksum(file_path: Union[str, Path]) -> str:
        """
        Calculate SHA256 checksum of a file.

        Args:
            file_path: Path to file

        Returns:
            SHA256 hex digest
        """
        sha256_hash = hashlib.sha256()
        with open(file_path, "rb") as f:
            for byte_block in iter(lambda: f.read(4096), b""):
                sha256_hash.update(byte_block)
        return sha256_hash.hexdigest()

    # -- complex codec -----------------------------------------------------

    @staticmethod
    def encode_complex(values: np.ndarray) -> List:
        """Nested lists with every complex entry written as [re, im]."""
        values = np.asarray(values, dtype=complex)
        return np.stack([values.real, values.imag], axis=-1).tolist()

    @staticmethod
    def decode_complex(data: Any, location: str = "$") -> np.ndarray:
        """Inverse of encode_complex; the innermost axis must hold [re, im] pairs."""
        try:
            pairs = np.asarray(data, dtype=float)
        except (TypeError, ValueError) as e:
            raise DocumentFormatError(location, f"{location}: expected numeric [re, im] pairs ({e})") from e
        if pairs.ndim == 0 or pairs.shape[-1] != 2:
            raise DocumentFormatError(location, f"{location}: complex entries must be [re, im] pairs")
        return pairs[..., 0] + 1j * pairs[..., 1]

    # -- frames --------------------------------------------------------------

    @staticmethod
    def frame_to_document(frame: Frame) -> Dict[str, Any]:
        return {
            "dim": frame.dim,
            "vectors": StorageService.encode_complex(frame.matrix),
            "labels": [list(label) if isinstance(label, tuple) else label for label in frame.labels],
        }

    @staticmethod
    def frame_from_document(document: Dict[str, Any]) -> Frame:
        """
        Build a Frame from {"dim": d, "vectors": [...], "labels": [...]}.

        vectors is either a list of J vectors (each d [re, im] pairs) or a flat
        row-major list of J*d pairs.
        """
        if not isinstance(document, dict) or "dim" not in document or "vectors" not in document:
            raise DocumentFormatError("$", "frame document needs 'dim' and 'vectors'")
        dim = document["dim"]
        if not isinstance(dim, int) or dim < 0:
            raise DocumentFormatError("$.dim", "$.dim: must be a nonnegative integer")
        values = StorageService.decode_complex(document["vectors"], "$.vectors")
        if values.ndim == 1:
            if dim == 0 or values.size % dim:
                raise DocumentFormatError("$.vectors", f"$.vectors: {values.size} entries not divisible by dim {dim}")
            values = values.reshape(-1, dim)
        if values.ndim != 2 or values.shape[1] != dim:
            raise DocumentFormatError("$.vectors", f"$.vectors: every vector must have {dim} entries")
        labels = document.get("labels") or ()
        labels = tuple(tuple(label) if isinstance(label, list) else label for label in labels)
        return Frame(values, labels)

    @staticmethod
    def read_frame(file_path: Union[str, Path]) -> Frame:
        return StorageService.frame_from_document(StorageService.read_json(file_path))

    @staticmethod
    def write_frame(frame: Frame, file_path: Union[str, Path]) -> str:
        return StorageService.write_json(StorageService.frame_to_document(frame), file_path)

    # -- operators -----------------------------------------------------------

    @staticmethod
    def hamiltonian_to_document(H: FrameHamiltonian) -> Dict[str, Any]:
        return {
            "dim": H.dim,
            "provenance": H.provenance,
            "matrix": StorageService.encode_complex(H.matrix),
            "weights": H.weights.E.tolist() if H.weights is not None else None,
            "labels": [list(label) if isinstance(label, tuple) else label for label in H.frame.labels]
            if H.frame is not None
            else None,
            "norm": H.norm(),
        }

    @staticmethod
    def spectrum_to_document(report: SpectrumReport, include_vectors: bool = False) -> Dict[str, Any]:
        document: Dict[str, Any] = {
            "eigenvalues": report.eigenvalues.tolist(),
            "residuals": report.residuals.tolist(),
            "max_residual": report.max_residual,
        }
        if report.kinds:
            document["kinds"] = list(report.kinds)
        if report.blocks:
            document["blocks"] = list(report.blocks)
        if include_vectors:
            document["eigenvectors"] = StorageService.encode_complex(report.eigenvectors.T)
        return document

