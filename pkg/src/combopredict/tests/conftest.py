"""
Pytest configuration and fixtures for combopredict tests.

This module provides:
- tmp_config_dir fixture for temporary config directories
- sample_config_yaml fixture with a small study referencing temporary CSVs
- write_csv factory fixture for constructed input files
- bundled fixture loaders (Keynote-062 curves, Checkmate-067 waterfalls)
- small synthetic curves and a fast copula configuration
"""

import pytest
import tempfile
import shutil
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from combopredict.models.base import SurvivalCurve, WaterfallSample
from combopredict.schemas import CopulaConfig
from combopredict.utils.csvio import load_survival_csv, load_waterfall_csv
from combopredict.utils.path import fixture_path


@pytest.fixture
def tmp_config_dir():
    """
    Create a temporary config directory for combopredict tests.

    This fixture creates a temporary directory that can be used
    for storing config files and input CSVs.
    """
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def write_csv(tmp_config_dir):
    """
    Factory writing text to a CSV in the temporary directory.

    Returns:
        Callable[[str, str], Path]: (file name, content) -> path
    """
    def _write(name: str, content: str) -> Path:
        path = tmp_config_dir / name
        path.write_text(content)
        return path
    return _write


@pytest.fixture
def sample_config_yaml(tmp_config_dir, write_csv):
    """
    Create a sample config YAML file for testing.

    The 'toy' study points at two small waterfalls written next to the
    config; the 'gastric' study points at bundled fixtures by name.

    Returns:
        Path: Path to the created config file
    """
    write_csv("toy_a.csv", "pchg\n-80\n-40\n-10\n0\n20\n")
    write_csv("toy_b.csv", "pchg\n-60\n-35\n5\n30\n")
    config_content = """
logging:
  level: INFO

copula:
  rho: 0.1
  n_draws: 500
  cutoff: -30
  seed: 7

bootstrap:
  nboot: 100
  workers: 1

design:
  alpha_one_sided: 0.05
  power: 0.80

studies:
  - name: toy
    drugs:
      - label: toy a
        orr: 0.4
        n: 5
        waterfall: toy_a.csv
      - label: toy b
        orr: 0.5
        n: 4
        waterfall: toy_b.csv
    correlation:
      phi_tumor: 0.1
    cutoff: -30
    seed: 11

  - name: gastric
    drugs:
      - label: chemotherapy
        orr: 0.372
        n: 250
        dor_curve: keynote062_chemo_dor.csv
      - label: pembrolizumab
        orr: 0.148
        n: 256
        dor_curve: keynote062_pembro_dor.csv
"""
    config_path = tmp_config_dir / "config.yaml"
    config_path.write_text(config_content)
    return config_path


@pytest.fixture
def keynote_curves():
    """Bundled Keynote-062 chemotherapy and pembrolizumab DoR curves."""
    return (
        load_survival_csv(fixture_path("keynote062_chemo_dor.csv")),
        load_survival_csv(fixture_path("keynote062_pembro_dor.csv")),
    )


@pytest.fixture
def checkmate_waterfalls():
    """Bundled Checkmate-067 ipilimumab, nivolumab and combination waterfalls."""
    return (
        load_waterfall_csv(fixture_path("checkmate067_ipi_waterfall.csv")),
        load_waterfall_csv(fixture_path("checkmate067_nivo_waterfall.csv")),
        load_waterfall_csv(fixture_path("checkmate067_combo_waterfall.csv")),
    )


@pytest.fixture
def step_curves():
    """Two short synthetic survival curves on the same grid."""
    times = np.arange(6, dtype=float)
    return (
        SurvivalCurve(times, [1.0, 0.8, 0.6, 0.45, 0.3, 0.2]),
        SurvivalCurve(times, [1.0, 0.9, 0.75, 0.6, 0.5, 0.4]),
    )


@pytest.fixture
def fast_copula():
    """Copula settings small enough for unit tests."""
    return CopulaConfig(rho=0.25, n_draws=2000, cutoff=-30, seed=123)


@pytest.fixture
def continuous_samples():
    """Two 400-patient synthetic waterfalls with distinct values."""
    rng = np.random.default_rng(5)
    return (
        WaterfallSample(np.clip(rng.normal(-20, 35, 400), -100, None)),
        WaterfallSample(np.clip(rng.normal(-35, 30, 400), -100, None)),
    )
