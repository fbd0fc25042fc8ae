"""
Run Registry Service
Manages run folders and lineage tracking for CLI experiments.
"""

import hashlib
import json
from datetime import datetime, timezone

UTC = timezone.utc
from pathlib import Path
from typing import Dict, Any, Optional, List
from config.settings import settings
from services.exceptions import RunNotFoundError


class RunRegistry:
    """Manages run folders and their lineage."""

    def __init__(self, storage_path: Optional[Path] = None):
        self.storage_path = Path(storage_path) if storage_path is not None else settings.output_dir
        self.storage_path.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def run_id_for(task: str, config: Dict[str, Any], seed: int) -> str:
        """
        Deterministic run identifier.

        Identical (task, config, seed) triples map to the same id, so repeated
        runs overwrite the same report.
        """
        canonical = json.dumps({"task": task, "config": config, "seed": seed}, sort_keys=True, default=str)
        return f"run_{hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:12]}"

    def create_run(self, task: str, config: Dict[str, Any], seed: int) -> str:
        """
        Create (or reuse) the folder for a run and initialise its lineage.

        Args:
            task: Task name
            config: Validated configuration echo
            seed: Seed for randomised suites

        Returns:
            Run ID
        """
        run_id = self.run_id_for(task, config, seed)
        run_path = self.storage_path / run_id
        run_path.mkdir(parents=True, exist_ok=True)

        lineage_path = run_path / "lineage.json"
        if not lineage_path.exists():
            lineage = {
                "run_id": run_id,
                "created_at": datetime.now(UTC).isoformat(),
                "task": task,
                "seed": seed,
                "steps": [],
            }
            self._save_json(lineage_path, lineage)

        return run_id

    def get_run_path(self, run_id: str) -> Path:
        run_path = self.storage_path / run_id
        if not run_path.exists():
            raise RunNotFoundError(run_id)
        return run_path

    def get_run_state(self, run_id: str) -> Dict[str, Any]:
        """
        Get current state of a run.

        Args:
            run_id: Run identifier

        Returns:
            Run state information
        """
        run_path = self.get_run_path(run_id)
        return {
            "run_id": run_id,
            "exists": True,
            "has_report": (run_path / "report.json").exists(),
            "tables": sorted(p.name for p in run_path.glob("*.csv")),
            "path": str(run_path),
        }

    def append_lineage_step(
        self,
        run_id: str,
        operation: str,
        inputs: Optional[List[str]] = None,
        outputs: Optional[List[str]] = None,
        params: Optional[Dict[str, Any]] = None,
        metrics: Optional[Dict[str, Any]] = None,
    ) -> str:
        """
        Append a step to the run's lineage.

        Args:
            run_id: Run identifier
            operation: Operation name
            inputs: Input artifacts
            outputs: Output artifacts
            params: Operation parameters
            metrics: Computed metrics

        Returns:
            Step ID
        """
        lineage_path = self.storage_path / run_id / "lineage.json"

        if not lineage_path.exists():
            raise RunNotFoundError(run_id, f"Lineage file not found for run {run_id}")

        lineage = self._load_json(lineage_path)

        step_id = f"st_{len(lineage['steps']) + 1:04d}"
        step = {
            "id": step_id,
            "timestamp": datetime.now(UTC).isoformat(),
            "operation": operation,
            "inputs": inputs or [],
            "outputs": outputs or [],
            "params": params or {},
            "metrics": metrics or {},
        }

        lineage["steps"].append(step)
        self._save_json(lineage_path, lineage)

        return step_id

    def get_lineage(self, run_id: str) -> Optional[Dict[str, Any]]:
        """
        Get lineage for a run.

        Returns:
            Lineage if exists, None otherwise
        """
        lineage_path = self.storage_path / run_id / "lineage.json"

        if lineage_path.exists():
            return self._load_json(lineage_path)

        return None

    def list_runs(self) -> List[str]:
        return sorted(p.name for p in self.storage_path.iterdir() if p.is_dir() and p.name.startswith("run_"))

    def _save_json(self, path: Path, data: Dict[str, Any]) -> None:
        """Save data as JSON."""
        with open(path, "w") as f:
            json.dump(data, f, indent=2, default=str)

    def _load_json(self, path: Path) -> Dict[str, Any]:
        """Load JSON data."""
        with open(path, "r") as f:
            return json.load(f)
