"""
Unit tests for utility functions.

Tests cover:
- Config and data path resolution
- Seeded random streams
- Logging setup
- SVG chart output

Usage:
    # Run tests
    pytest src/combopredict/tests/test_utils.py -v

    # Or with direct execution
    python src/combopredict/tests/test_utils.py
"""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from combopredict.models.base import PredictedBand
from combopredict.utils import fixture_path, make_generator, resolve_config_path, resolve_data_path
from combopredict.utils.log import setup_logging
from combopredict.utils.path import BUNDLED_CONFIG
from combopredict.utils.svg import write_waterfall_svg


@pytest.fixture
def isolated_cwd(tmp_config_dir, monkeypatch):
    """Run with an empty working directory and home so no default config is found."""
    monkeypatch.chdir(tmp_config_dir)
    monkeypatch.setenv("HOME", str(tmp_config_dir))
    return tmp_config_dir


class TestPathResolution:
    """Tests for path resolution utilities."""

    def test_resolve_existing_file(self, tmp_config_dir):
        """Test resolving path to existing file."""
        config_file = tmp_config_dir / "config.yaml"
        config_file.write_text("studies: []")

        resolved = resolve_config_path(str(config_file))

        assert Path(resolved).exists()
        assert resolved.endswith("config.yaml")

    def test_resolve_path_object(self, tmp_config_dir):
        config_file = tmp_config_dir / "config.yaml"
        config_file.write_text("studies: []")
        assert Path(resolve_config_path(config_file)) == config_file.absolute()

    def test_default_falls_back_to_bundled_config(self, isolated_cwd):
        assert Path(resolve_config_path()) == BUNDLED_CONFIG.absolute()

    def test_default_prefers_working_directory(self, isolated_cwd):
        local = isolated_cwd / "configs" / "config.yaml"
        local.parent.mkdir()
        local.write_text("studies: []")
        assert Path(resolve_config_path()) == local.absolute()

    def test_nonexistent_path(self, isolated_cwd):
        """An explicit path never falls back to the bundled config."""
        with pytest.raises(FileNotFoundError):
            resolve_config_path("/absolutely/nonexistent/impossible/path/config.yaml")

    def test_data_relative_to_base_dir(self, tmp_config_dir, isolated_cwd):
        data_dir = tmp_config_dir / "data"
        data_dir.mkdir()
        (data_dir / "curve.csv").write_text("time_months,survival_prob\n0,1\n")
        assert resolve_data_path("curve.csv", base_dir=data_dir) == (data_dir / "curve.csv").absolute()

    def test_data_falls_back_to_fixtures(self, isolated_cwd):
        resolved = resolve_data_path("keynote062_chemo_dor.csv", base_dir=isolated_cwd)
        assert resolved == fixture_path("keynote062_chemo_dor.csv").absolute()

    def test_missing_data_file(self, isolated_cwd):
        with pytest.raises(FileNotFoundError):
            resolve_data_path("missing.csv", base_dir=isolated_cwd)

    def test_unknown_fixture(self):
        with pytest.raises(FileNotFoundError):
            fixture_path("not_a_fixture.csv")


class TestRandomStreams:
    """Tests for seeded generators."""

    def test_same_seed_same_stream(self):
        assert make_generator(5, 2).random() == make_generator(5, 2).random()

    def test_streams_differ(self):
        assert make_generator(5, 1).random() != make_generator(5, 2).random()

    def test_root_differs_from_replicate(self):
        assert make_generator(5).random() != make_generator(5, 0).random()


class TestLogging:
    """Tests for logging setup."""

    def test_single_handler_and_level(self):
        setup_logging("DEBUG")
        setup_logging("INFO")
        logger = logging.getLogger("combopredict")
        assert len(logger.handlers) == 1
        assert logger.level == logging.INFO
        setup_logging("WARNING")

    def test_unknown_level_defaults_to_warning(self):
        setup_logging("CHATTY")
        assert logging.getLogger("combopredict").level == logging.WARNING


class TestSvg:
    """Tests for the waterfall chart."""

    @staticmethod
    def _band():
        predicted = np.linspace(60.0, -100.0, 50)
        return PredictedBand(
            index=np.linspace(0.0, 1.0, 50),
            predicted=predicted,
            lower=predicted - 10.0,
            upper=predicted + 10.0,
        )

    def test_writes_svg(self, tmp_config_dir):
        path = write_waterfall_svg(self._band(), tmp_config_dir / "chart.svg", cutoff=-30, title="toy")
        text = path.read_text()
        assert "<svg" in text
        assert "toy" in text

    def test_deterministic_output(self, tmp_config_dir):
        observed = {"observed combo": np.linspace(50.0, -90.0, 30)}
        first = write_waterfall_svg(self._band(), tmp_config_dir / "a.svg", observed=observed)
        second = write_waterfall_svg(self._band(), tmp_config_dir / "b.svg", observed=observed)
        assert first.read_bytes() == second.read_bytes()


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent.parent.parent))
    from combopredict.tests.base import run_tests_with_report
    sys.exit(run_tests_with_report(__file__, 'utils'))
