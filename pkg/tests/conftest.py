"""
Test configuration and fixtures for the Parseval Hamiltonian toolkit tests.
"""
import json
import shutil
import tempfile
from pathlib import Path
from typing import Any, Dict, Generator
from unittest.mock import patch

import numpy as np
import pytest

from core.deterministic.casazza_christensen import CCBlock, cc_frame
from core.deterministic.frame_core import Frame, random_parseval_frame


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for tests."""
    temp_path = Path(tempfile.mkdtemp())
    try:
        yield temp_path
    finally:
        shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture
def mock_output_dir(temp_dir: Path) -> Generator[Path, None, None]:
    """Point the run output directory at a temporary folder."""
    output_dir = temp_dir / "runs"
    output_dir.mkdir(parents=True, exist_ok=True)

    with patch("services.registry.settings.output_dir", output_dir):
        yield output_dir


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for randomised suites."""
    return np.random.default_rng(20240611)


@pytest.fixture
def cc2_block() -> CCBlock:
    """The n = 2 block with E = (1, 3, 5); H = [[3.5, 1.5], [1.5, 3.5]]."""
    return CCBlock(2, np.array([1.0, 3.0, 5.0]))


@pytest.fixture
def cc2_frame() -> Frame:
    return cc_frame(2)


@pytest.fixture
def onb3() -> Frame:
    """Standard basis of C^3."""
    return Frame(np.eye(3))


@pytest.fixture
def random_pf(rng: np.random.Generator) -> Frame:
    """Parseval frame of 7 vectors in C^4."""
    return random_parseval_frame(4, 7, rng)


@pytest.fixture
def onb_frame_document() -> Dict[str, Any]:
    """Frame document of the standard basis of C^2."""
    return {
        "dim": 2,
        "vectors": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        "labels": ["e1", "e2"],
    }


@pytest.fixture
def write_config(temp_dir: Path):
    """Write a config dict as JSON and return its path."""

    def _write(config: Dict[str, Any], name: str = "config.json") -> Path:
        path = temp_dir / name
        path.write_text(json.dumps(config, indent=2))
        return path

    return _write
