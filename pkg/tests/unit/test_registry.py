"""
Tests for RunRegistry service.
"""
import json
from datetime import datetime
from pathlib import Path

import pytest

from services.exceptions import RunNotFoundError
from services.registry import RunRegistry


class TestRunRegistry:
    """Test cases for RunRegistry."""

    @pytest.fixture
    def registry(self, mock_output_dir: Path) -> RunRegistry:
        """Create a registry on the patched output directory."""
        return RunRegistry()

    def test_create_run(self, registry: RunRegistry, mock_output_dir: Path):
        """Test run folder and lineage creation."""
        run_id = registry.create_run("cc-spectrum", {"n": 2, "E": [1, 3, 5]}, 0)

        assert run_id.startswith("run_")
        assert len(run_id) == 16  # "run_" + 12 hex chars

        lineage = json.loads((mock_output_dir / run_id / "lineage.json").read_text())
        assert lineage["run_id"] == run_id
        assert lineage["task"] == "cc-spectrum"
        assert lineage["seed"] == 0
        assert lineage["steps"] == []
        assert isinstance(datetime.fromisoformat(lineage["created_at"]), datetime)

    def test_run_id_deterministic(self):
        """Test the id depends only on task, config and seed."""
        a = RunRegistry.run_id_for("naimark", {"b": 1, "a": 2}, 7)
        b = RunRegistry.run_id_for("naimark", {"a": 2, "b": 1}, 7)

        assert a == b
        assert a != RunRegistry.run_id_for("naimark", {"a": 2, "b": 1}, 8)
        assert a != RunRegistry.run_id_for("spectrum", {"a": 2, "b": 1}, 7)

    def test_rerun_keeps_lineage(self, registry: RunRegistry):
        """Test that re-creating a run does not reset its lineage."""
        run_id = registry.create_run("riesz-pairs", {"scale": 0.5}, 0)
        registry.append_lineage_step(run_id, "riesz-pairs")

        assert registry.create_run("riesz-pairs", {"scale": 0.5}, 0) == run_id
        assert len(registry.get_lineage(run_id)["steps"]) == 1

    def test_append_lineage_steps(self, registry: RunRegistry):
        """Test sequential step ids and recorded fields."""
        run_id = registry.create_run("naimark", {}, 1)
        first = registry.append_lineage_step(run_id, "naimark", outputs=["dilation.csv"], metrics={"passed": True})
        second = registry.append_lineage_step(run_id, "export")

        assert (first, second) == ("st_0001", "st_0002")
        step = registry.get_lineage(run_id)["steps"][0]
        assert step["operation"] == "naimark"
        assert step["outputs"] == ["dilation.csv"]
        assert step["metrics"] == {"passed": True}
        assert step["inputs"] == []

    def test_append_to_missing_run(self, registry: RunRegistry):
        """Test lineage of an unknown run."""
        with pytest.raises(RunNotFoundError, match="Lineage file not found"):
            registry.append_lineage_step("run_missing", "naimark")
        assert registry.get_lineage("run_missing") is None

    def test_run_state(self, registry: RunRegistry, mock_output_dir: Path):
        """Test the state summary lists tables and the report."""
        run_id = registry.create_run("spectrum", {}, 0)
        run_path = mock_output_dir / run_id
        (run_path / "spectrum.csv").touch()
        (run_path / "report.json").touch()

        state = registry.get_run_state(run_id)
        assert state["has_report"] is True
        assert state["tables"] == ["spectrum.csv"]
        assert state["path"] == str(run_path)

    def test_run_state_missing(self, registry: RunRegistry):
        """Test state of a run that does not exist."""
        with pytest.raises(RunNotFoundError, match="Run run_nope not found"):
            registry.get_run_state("run_nope")

    def test_list_runs(self, registry: RunRegistry, mock_output_dir: Path):
        """Test only run folders are listed, sorted."""
        ids = {registry.create_run("naimark", {"trials": t}, 0) for t in (1, 2)}
        (mock_output_dir / "scratch").mkdir()

        assert registry.list_runs() == sorted(ids)

    def test_explicit_storage_path(self, temp_dir: Path):
        """Test an explicit folder overrides settings."""
        registry = RunRegistry(temp_dir / "elsewhere")
        run_id = registry.create_run("naimark", {}, 0)

        assert (temp_dir / "elsewhere" / run_id).is_dir()
