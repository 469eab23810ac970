"""
Unit tests for Main class functionality.

Tests cover:
- Config loading and section defaults
- Study listing, setup and loading of referenced files
- ORR, DoR, waterfall and sample-size entry points

Usage:
    # Run tests
    pytest src/combopredict/tests/test_main.py -v

    # Or with direct execution
    python src/combopredict/tests/test_main.py
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from combopredict.main import Main, arm_rate
from combopredict.models.base import CorrelationSpec, Rate
from combopredict.models.dor import median_of_curve
from combopredict.schemas import DrugArm, StudyInput


class TestMainConfiguration:
    """Tests for Main class configuration handling."""

    def test_load_config(self, sample_config_yaml):
        """Test loading configuration from file."""
        main = Main(config_path=str(sample_config_yaml))

        # Verify config is loaded
        assert main.config_morpher is not None
        assert main.config_dir == sample_config_yaml.parent
        assert main.log_level() == "INFO"

    def test_copula_section(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        cfg = main.copula_config()

        # Verify section values override model defaults
        assert cfg.rho == 0.1
        assert cfg.n_draws == 500
        assert cfg.seed == 7
        assert cfg.grid_min == -120

    def test_overrides_win_and_none_is_ignored(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        cfg = main.copula_config(rho=0.2, seed=None)
        assert cfg.rho == 0.2
        assert cfg.seed == 7

    def test_bootstrap_and_design_sections(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        assert main.bootstrap_config().nboot == 100
        spec = main.design_spec(0.4, 0.6)
        assert spec.power == 0.80
        assert spec.alpha_one_sided == 0.05

    def test_bundled_config(self):
        main = Main()
        assert "keynote062" in main.list_studies()
        assert main.copula_config().seed == 20201


class TestMainStudies:
    """Tests for study setup and loading."""

    def test_list_studies(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        assert main.list_studies() == ["toy", "gastric"]

    def test_setup_study(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        study = main.setup_study("toy")

        # Verify
        assert isinstance(study, StudyInput)
        assert [arm.label for arm in study.drugs] == ["toy a", "toy b"]
        assert study.correlation.phi_tumor == 0.1
        assert study.seed == 11

    def test_setup_default_study(self, sample_config_yaml):
        """Test setup with default (first) study."""
        main = Main(config_path=str(sample_config_yaml))
        assert main.setup_study().name == "toy"

    def test_invalid_study_name(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        with pytest.raises(ValueError):
            main.setup_study("nonexistent")

    def test_load_study_relative_files(self, sample_config_yaml):
        """Waterfalls next to the config are found by relative name."""
        main = Main(config_path=str(sample_config_yaml))
        data = main.load_study("toy")
        assert [len(s) for s in data.waterfalls] == [5, 4]
        assert data.waterfalls[0].label == "toy a"
        assert data.curves == [None, None]
        assert [r.value for r in data.rates()] == [0.4, 0.5]

    def test_load_study_bundled_files(self, sample_config_yaml):
        """Curves missing next to the config fall back to the bundled fixtures."""
        main = Main(config_path=str(sample_config_yaml))
        data = main.load_study("gastric")
        assert all(curve is not None for curve in data.curves)
        assert data.combination_curve is None

    def test_bundled_study_observed_curves(self):
        """Worked-example studies carry the observed combination arms."""
        main = Main()
        assert median_of_curve(main.load_study("keynote062").combination_curve) == pytest.approx(6.8)
        assert len(main.load_study("checkmate067").combination_waterfall) == 200

    def test_study_needs_two_drugs(self):
        with pytest.raises(ValidationError):
            StudyInput(name="solo", drugs=[DrugArm(label="a", orr=0.3)])

    def test_arm_without_endpoint(self):
        with pytest.raises(ValidationError):
            DrugArm(label="empty")

    def test_arm_rate_requires_orr(self):
        with pytest.raises(ValueError):
            arm_rate(DrugArm(label="w", waterfall="w.csv"))
        assert arm_rate(DrugArm(label="a", orr=0.3, n=40)) == Rate(0.3, n=40)


class TestMainPredictions:
    """Tests for the prediction entry points."""

    def test_predict_orr_with_interval(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        prediction = main.predict_orr(0.372, 0.148, n1=250, n2=256)
        assert prediction.rate == pytest.approx(0.464944)
        assert prediction.lower < prediction.rate < prediction.upper
        rows = prediction.as_rows()
        assert list(rows) == ["r", "r12", "r10", "r02", "std_err", "lower", "upper"]

    def test_predict_orr_without_sizes(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        prediction = main.predict_orr(0.3, 0.5, 0.1)
        assert prediction.std_err is None
        assert list(prediction.as_rows()) == ["r", "r12", "r10", "r02"]

    def test_predict_orr_no_responders(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        prediction = main.predict_orr(0.0, 0.0)
        assert prediction.rate == 0.0
        assert math.isnan(prediction.r12)

    def test_predict_dor_from_paths(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        band = main.predict_dor(
            "keynote062_chemo_dor.csv", "keynote062_pembro_dor.csv",
            Rate(0.372, n=250), Rate(0.148, n=256), CorrelationSpec(),
        )
        assert band.curve.probs[0] == 1.0
        assert np.all(np.isfinite(band.variance))

    def test_predict_waterfall_from_paths(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        band = main.predict_waterfall("toy_a.csv", "toy_b.csv")
        assert band.predicted.size == 500
        assert band.seed == 7
        assert band.lower is None

    def test_predict_waterfall_with_bootstrap(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        band = main.predict_waterfall("toy_a.csv", "toy_b.csv", nboot=100)
        assert band.nboot == 100
        assert np.all(band.lower <= band.upper)

    def test_sample_size(self, sample_config_yaml):
        main = Main(config_path=str(sample_config_yaml))
        result = main.sample_size(main.design_spec(0.70, 0.80))
        assert result["n_per_arm"] == 231
        assert result["n_total"] == 462
        assert result["achieved_power"] >= 0.80


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent.parent.parent))
    from combopredict.tests.base import run_tests_with_report
    sys.exit(run_tests_with_report(__file__, 'main'))
