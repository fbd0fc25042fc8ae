"""
Tests for experiment config parsing and validation.
"""
import json
from pathlib import Path

import pytest

from cli.models import (
    CCSpectrumConfig,
    FrameVerifyConfig,
    PseudoBosonConfig,
    RieszPairsConfig,
    SpectrumConfig,
    load_config,
    parse_config,
)
from services.exceptions import ConfigError


def _text(config) -> str:
    return json.dumps(config, indent=2)


class TestParseConfig:
    """Test cases for parse_config."""

    def test_task_selects_model(self):
        """Test the task field picks the config model."""
        config = parse_config(_text({"task": "cc-spectrum", "n": 2, "E": [1, 3, 5]}))

        assert isinstance(config, CCSpectrumConfig)
        assert config.block_specs()[0].E == [1.0, 3.0, 5.0]

    def test_task_filled_from_command(self):
        """Test a missing task is taken from the command."""
        config = parse_config(_text({"m": {"kind": "constant", "value": 0.6}}), task="pseudo-boson")

        assert isinstance(config, PseudoBosonConfig)
        assert config.grid.P == 2048
        assert config.N == 20

    def test_task_mismatch(self):
        """Test a config written for another command is rejected with its line."""
        with pytest.raises(ConfigError, match=r"<config>:2: config task 'naimark' does not match command 'spectrum'"):
            parse_config(_text({"task": "naimark", "random": {"dim": 2}}), task="spectrum")

    def test_invalid_json_line_and_column(self):
        """Test JSON syntax errors carry line and column."""
        with pytest.raises(ConfigError) as exc_info:
            parse_config('{\n  "task": "cc-ladders",\n  "n_max": }', source="bad.json")

        assert exc_info.value.line == 3
        assert str(exc_info.value).startswith("bad.json:3: column")

    def test_top_level_must_be_object(self):
        """Test a JSON array is not a config."""
        with pytest.raises(ConfigError, match="top level must be a JSON object"):
            parse_config("[1, 2]")

    def test_unknown_field_path(self):
        """Test unknown fields fail with their path and line."""
        text = _text({"task": "cc-ladders", "n_max": 5, "nmax": 6})
        with pytest.raises(ConfigError) as exc_info:
            parse_config(text)

        assert "nmax" in str(exc_info.value)
        assert exc_info.value.line == 4

    def test_nested_field_path(self):
        """Test nested errors report a dotted path without the task tag."""
        text = _text({"task": "pseudo-boson", "m": {"kind": "constant", "value": 0.6}, "grid": {"L": 10, "P": 10}})
        with pytest.raises(ConfigError, match=r"grid\.P"):
            parse_config(text)


class TestFrameSource:
    """Test cases for the frame source of frame tasks."""

    def test_exactly_one_source(self, onb_frame_document):
        """Test that two sources are rejected."""
        with pytest.raises(ConfigError, match="exactly one of frame_file, frame, random"):
            parse_config(_text({"task": "frame-verify", "frame": onb_frame_document, "random": {"dim": 2}}))

    def test_no_source(self):
        """Test that a source is required."""
        with pytest.raises(ConfigError, match="got none"):
            parse_config(_text({"task": "naimark"}))

    def test_inline_frame(self, onb_frame_document):
        """Test an inline frame document with defaults."""
        config = parse_config(_text({"task": "frame-verify", "frame": onb_frame_document}))

        assert isinstance(config, FrameVerifyConfig)
        assert config.random_vectors == 100
        assert config.frame.dim == 2


class TestTaskConfigs:
    """Test cases for per-task constraints."""

    def test_spectrum_defaults(self):
        """Test spectrum defaults and the empty-weights guard."""
        config = parse_config(_text({"task": "spectrum", "random": {"dim": 3, "excess": 2}}))

        assert isinstance(config, SpectrumConfig)
        assert config.declared_tail == "bounded"
        assert config.scan_offset == 1e-3
        with pytest.raises(ConfigError, match="E cannot be empty"):
            parse_config(_text({"task": "spectrum", "random": {"dim": 3}, "E": []}))

    @pytest.mark.parametrize(
        "config, message",
        [
            ({"n": 2, "E": [1, 3]}, "n \\+ 1 = 3"),
            ({"n": 2}, "n and E must be given together"),
            ({"family": "ranked"}, "family requires N_blocks"),
            ({"n": 2, "E": [1, 3, 5], "family": "ranked", "N_blocks": 3}, "exactly one of"),
            ({"blocks": [{"n": 1, "E": [1]}]}, "n \\+ 1 = 2"),
        ],
    )
    def test_cc_spectrum_shapes(self, config, message):
        """Test the block/family alternatives and their shapes."""
        with pytest.raises(ConfigError, match=message):
            parse_config(_text({"task": "cc-spectrum", **config}))

    def test_cc_family(self):
        """Test a named family config."""
        config = parse_config(_text({"task": "cc-spectrum", "family": "sqrt_bounded", "N_blocks": 10}))

        assert config.family == "sqrt_bounded"
        assert config.N_blocks == 10

    def test_weight_kinds(self):
        """Test weight parameters are required per kind."""
        with pytest.raises(ConfigError, match="constant weight requires value"):
            parse_config(_text({"task": "pseudo-boson", "m": {"kind": "constant"}}))
        with pytest.raises(ConfigError, match="at least 4 points"):
            parse_config(_text({"task": "pseudo-boson", "m": {"kind": "tabulated", "x": [0, 1], "values": [0.5, 0.5]}}))

    def test_two_grid_order_range(self):
        """Test the two-grid order must leave room for the raising relation."""
        with pytest.raises(ConfigError, match="two_grid_order must be below N - 1 = 3"):
            parse_config(_text({"task": "pseudo-boson", "m": {"kind": "constant", "value": 0.6}, "N": 4, "two_grid_order": 3}))

    @pytest.mark.parametrize(
        "config, message",
        [
            ({}, "got none"),
            ({"scale": 0.5, "random_norm": 0.5}, "exactly one of X, scale, random_norm"),
            ({"X": [[[1, 0], [0, 0]]]}, "X must be square"),
            ({"random_norm": 1.0}, "random_norm = 1"),
        ],
    )
    def test_riesz_pairs_operator(self, config, message):
        """Test that exactly one operator description is given."""
        with pytest.raises(ConfigError, match=message):
            parse_config(_text({"task": "riesz-pairs", **config}))

    def test_riesz_pairs_matrix(self):
        """Test a square complex matrix is accepted."""
        config = parse_config(_text({"task": "riesz-pairs", "X": [[[0.5, 0], [0, 0.1]], [[0, 0], [0.5, 0]]]}))

        assert isinstance(config, RieszPairsConfig)
        assert config.X[0][1] == (0.0, 0.1)

    def test_prop15_task_name(self):
        """Test the prop15 task name selects the Riesz pair config under either command."""
        config = parse_config(_text({"task": "prop15", "scale": 0.5}))

        assert isinstance(config, RieszPairsConfig)
        assert config.task == "prop15"
        assert isinstance(parse_config(_text({"task": "prop15", "scale": 0.5}), task="riesz-pairs"), RieszPairsConfig)
        assert parse_config(_text({"scale": 0.5}), task="prop15").task == "prop15"

    def test_negative_seed(self):
        """Test seeds must be nonnegative."""
        with pytest.raises(ConfigError, match="seed"):
            parse_config(_text({"task": "cc-ladders", "seed": -1}))


class TestLoadConfig:
    """Test cases for load_config."""

    def test_load_from_file(self, write_config):
        """Test a config file round trip."""
        path = write_config({"task": "cc-ladders", "n_max": 12})

        assert load_config(path).n_max == 12

    def test_missing_file(self, temp_dir: Path):
        """Test an unreadable path is a config error."""
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(temp_dir / "absent.json")

    def test_error_names_file(self, write_config):
        """Test errors are prefixed with the file path."""
        path = write_config({"task": "cc-ladders", "n_max": 0})
        with pytest.raises(ConfigError) as exc_info:
            load_config(path)

        assert str(exc_info.value).startswith(f"{path}:3: n_max")
