"""
Unit tests for the command-line interface.

Tests cover:
- Key,value output of each subcommand
- Output files and their comment headers
- Error lines and exit codes per error category

Usage:
    # Run tests
    pytest src/combopredict/tests/test_cli.py -v

    # Or with direct execution
    python src/combopredict/tests/test_cli.py
"""

import sys
from pathlib import Path

import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from combopredict.cli import build_parser, main
from combopredict.utils.path import fixture_path


def _rows(stdout: str) -> dict:
    lines = [line for line in stdout.splitlines() if line]
    assert lines[0] == "key,value"
    return dict(line.split(",", 1) for line in lines[1:])


def _error_line(stderr: str) -> str:
    lines = [line for line in stderr.splitlines() if line.startswith("error ")]
    assert len(lines) == 1
    return lines[0]


class TestParser:
    """Tests for argument parsing."""

    def test_subcommands(self):
        parser = build_parser()
        args = parser.parse_args(["predict-orr", "--r1", "0.3", "--r2", "0.4"])
        assert args.command == "predict-orr"
        assert args.phi is None

    def test_missing_subcommand(self, capsys):
        assert main([]) == 2
        assert "category=usage" in _error_line(capsys.readouterr().err)

    def test_bad_number(self, capsys):
        assert main(["predict-orr", "--r1", "abc", "--r2", "0.4"]) == 2
        assert "category=usage" in _error_line(capsys.readouterr().err)


class TestPredictOrrCommand:
    """Tests for predict-orr."""

    def test_gastric_example(self, sample_config_yaml, capsys):
        code = main(["-c", str(sample_config_yaml), "predict-orr", "--r1", "0.372", "--r2", "0.148"])
        assert code == 0
        rows = _rows(capsys.readouterr().out)
        assert rows["r"].startswith("0.4649")
        assert "std_err" not in rows

    def test_interval_from_study(self, sample_config_yaml, capsys):
        code = main(["-c", str(sample_config_yaml), "predict-orr", "--study", "gastric"])
        assert code == 0
        rows = _rows(capsys.readouterr().out)
        assert float(rows["lower"]) < float(rows["r"]) < float(rows["upper"])

    def test_missing_rate(self, sample_config_yaml, capsys):
        assert main(["-c", str(sample_config_yaml), "predict-orr", "--r1", "0.3"]) == 2
        assert "--r2 is required" in _error_line(capsys.readouterr().err)

    def test_infeasible_correlation(self, sample_config_yaml, capsys):
        code = main(["-c", str(sample_config_yaml), "predict-orr",
                     "--r1", "0.9", "--r2", "0.1", "--phi", "0.5"])
        assert code == 5
        assert "category=infeasible-model" in _error_line(capsys.readouterr().err)

    def test_rate_out_of_range(self, sample_config_yaml, capsys):
        code = main(["-c", str(sample_config_yaml), "predict-orr", "--r1", "1.5", "--r2", "0.1"])
        assert code == 4
        assert "category=invariant" in _error_line(capsys.readouterr().err)

    def test_unknown_study(self, sample_config_yaml, capsys):
        code = main(["-c", str(sample_config_yaml), "predict-orr", "--study", "nonexistent"])
        assert code == 2
        assert "category=usage" in _error_line(capsys.readouterr().err)

    def test_writes_output(self, sample_config_yaml, tmp_config_dir, capsys):
        output = tmp_config_dir / "orr.csv"
        main(["-c", str(sample_config_yaml), "predict-orr", "--r1", "0.19", "--r2", "0.437", "-o", str(output)])
        frame = pd.read_csv(output)
        assert frame.loc[frame["key"] == "r", "value"].iloc[0] == pytest.approx(0.544, abs=5e-4)


class TestPredictDorCommand:
    """Tests for predict-dor."""

    def test_gastric_study(self, sample_config_yaml, tmp_config_dir, capsys):
        output = tmp_config_dir / "dor.csv"
        code = main(["-c", str(sample_config_yaml), "predict-dor", "--study", "gastric", "-o", str(output)])
        assert code == 0
        rows = _rows(capsys.readouterr().out)
        assert float(rows["median_drug1"]) == pytest.approx(6.8)
        assert float(rows["median_drug2"]) == pytest.approx(13.7)
        assert rows["median_ordering"] == "combo_shorter"
        assert 7.0 <= float(rows["median_combination"]) <= 9.0

        lines = output.read_text().splitlines()
        assert lines[:3] == ["# phi_prime=0.0", "# phi_dprime=0.0", "# variance_pairing=derivative"]
        frame = pd.read_csv(output, comment="#")
        assert list(frame.columns) == ["time_months", "survival_prob", "variance", "lower", "upper"]

    def test_bundled_study_compares_observed(self, tmp_config_dir, capsys):
        code = main(["predict-dor", "--study", "keynote062", "-o", str(tmp_config_dir / "dor.csv")])
        assert code == 0
        rows = _rows(capsys.readouterr().out)
        assert float(rows["observed_median"]) == pytest.approx(6.8)
        assert float(rows["observed_coverage"]) >= 0.60
        assert float(rows["median_combination"]) > float(rows["observed_median"])

    def test_observed_option(self, sample_config_yaml, tmp_config_dir, capsys):
        code = main([
            "-c", str(sample_config_yaml), "predict-dor", "--study", "gastric",
            "--observed", "keynote062_combo_dor.csv", "-o", str(tmp_config_dir / "dor.csv"),
        ])
        assert code == 0
        assert "observed_max_abs_difference" in _rows(capsys.readouterr().out)

    def test_study_without_observed_curve(self, sample_config_yaml, tmp_config_dir, capsys):
        main(["-c", str(sample_config_yaml), "predict-dor", "--study", "gastric", "-o", str(tmp_config_dir / "dor.csv")])
        assert "observed_median" not in _rows(capsys.readouterr().out)

    def test_invalid_curve(self, sample_config_yaml, write_csv, tmp_config_dir, capsys):
        bad = write_csv("bad.csv", "time_months,survival_prob\n0,1.0\n1,0.9\n2,0.95\n")
        code = main([
            "-c", str(sample_config_yaml), "predict-dor",
            "--curve1", str(bad), "--curve2", str(fixture_path("keynote062_pembro_dor.csv")),
            "--r1", "0.3", "--r2", "0.2", "-o", str(tmp_config_dir / "out.csv"),
        ])
        assert code == 4
        line = _error_line(capsys.readouterr().err)
        assert "category=invariant" in line
        assert "row 3" in line
        assert not (tmp_config_dir / "out.csv").exists()


class TestPredictWaterfallCommand:
    """Tests for predict-waterfall."""

    def test_study_prediction(self, sample_config_yaml, tmp_config_dir, capsys):
        output = tmp_config_dir / "wf.csv"
        code = main(["-c", str(sample_config_yaml), "predict-waterfall", "--study", "toy", "-o", str(output)])
        assert code == 0
        rows = _rows(capsys.readouterr().out)
        assert rows["seed"] == "11"
        assert 0.0 <= float(rows["predicted_orr"]) <= 1.0
        assert output.read_text().splitlines()[0] == "# seed=11"
        frame = pd.read_csv(output, comment="#")
        assert len(frame) == 500

    def test_identical_reruns(self, sample_config_yaml, tmp_config_dir, capsys):
        outputs = [tmp_config_dir / "a.csv", tmp_config_dir / "b.csv"]
        for output in outputs:
            main(["-c", str(sample_config_yaml), "predict-waterfall", "--study", "toy", "-o", str(output)])
        assert outputs[0].read_bytes() == outputs[1].read_bytes()

    def test_rho_sweep(self, sample_config_yaml, tmp_config_dir, capsys):
        output = tmp_config_dir / "sweep.csv"
        code = main([
            "-c", str(sample_config_yaml), "predict-waterfall", "--study", "toy",
            "--rho", "0", "--rho", "0.25", "-o", str(output),
        ])
        assert code == 0
        frame = pd.read_csv(output, comment="#")
        assert list(frame.columns) == ["index", "predicted_rho_0", "predicted_rho_0.25"]

    def test_sweep_with_bootstrap_is_rejected(self, sample_config_yaml, tmp_config_dir, capsys):
        code = main([
            "-c", str(sample_config_yaml), "predict-waterfall", "--study", "toy",
            "--rho", "0", "--rho", "0.25", "--nboot", "100", "-o", str(tmp_config_dir / "x.csv"),
        ])
        assert code == 2

    def test_bootstrap_with_svg(self, sample_config_yaml, tmp_config_dir, capsys):
        output, svg = tmp_config_dir / "boot.csv", tmp_config_dir / "boot.svg"
        code = main([
            "-c", str(sample_config_yaml), "predict-waterfall", "--study", "toy",
            "--nboot", "100", "--svg", str(svg), "-o", str(output),
        ])
        assert code == 0
        frame = pd.read_csv(output, comment="#")
        assert frame["lower"].notna().all()
        assert svg.read_text().lstrip().startswith("<?xml")

    def test_unparsable_waterfall(self, sample_config_yaml, write_csv, tmp_config_dir, capsys):
        bad = write_csv("bad_wf.csv", "pchg\n-40\nlots\n")
        code = main([
            "-c", str(sample_config_yaml), "predict-waterfall",
            "--s1", str(bad), "--s2", str(bad), "-o", str(tmp_config_dir / "x.csv"),
        ])
        assert code == 3
        assert "category=parse" in _error_line(capsys.readouterr().err)

    def test_missing_file(self, sample_config_yaml, tmp_config_dir, capsys):
        code = main([
            "-c", str(sample_config_yaml), "predict-waterfall",
            "--s1", "nowhere.csv", "--s2", "nowhere.csv", "-o", str(tmp_config_dir / "x.csv"),
        ])
        assert code == 2


class TestDesignCommands:
    """Tests for reverse-orr, sample-size and deep-response."""

    def test_reverse_orr(self, capsys):
        assert main(["reverse-orr", "--r", "0.4649", "--r1", "0.372"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert float(rows["r2"]) == pytest.approx(0.148, abs=1e-4)

    def test_reverse_orr_no_solution(self, capsys):
        assert main(["reverse-orr", "--r", "0.2", "--r1", "0.5"]) == 5

    def test_sample_size(self, capsys):
        assert main(["sample-size", "--p-control", "0.7", "--p-experimental", "0.8"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert rows["n_per_arm"] == "231"
        assert rows["n_total"] == "462"

    def test_sample_size_continuity_correction(self, capsys):
        main(["sample-size", "--p-control", "0.4", "--p-experimental", "0.6", "--continuity-correction"])
        assert _rows(capsys.readouterr().out)["n_total"] == "172"

    def test_sample_size_equal_proportions(self, capsys):
        assert main(["sample-size", "--p-control", "0.4", "--p-experimental", "0.4"]) == 4

    def test_deep_response_of_file(self, capsys):
        path = fixture_path("hypothetical_drug1_waterfall.csv")
        assert main(["deep-response", "--waterfall", str(path)]) == 0
        rows = _rows(capsys.readouterr().out)
        assert float(rows["hypothetical_drug1_waterfall.deep_response_rate"]) == pytest.approx(0.40)
        assert float(rows["hypothetical_drug1_waterfall.orr"]) == pytest.approx(0.70)

    def test_deep_response_needs_input(self, capsys):
        assert main(["deep-response"]) == 2


class TestOtherCommands:
    """Tests for list and reproduce."""

    def test_list(self, sample_config_yaml, capsys):
        assert main(["-c", str(sample_config_yaml), "list"]) == 0
        out = capsys.readouterr().out
        assert "toy" in out and "gastric" in out

    def test_reproduce_subset(self, tmp_config_dir, capsys):
        output = tmp_config_dir / "checks.csv"
        code = main(["reproduce", "--fast", "--only", "orr_keynote062", "--only", "sample_size", "-o", str(output)])
        assert code == 0
        frame = pd.read_csv(output)
        assert frame["check"].tolist() == ["orr_keynote062", "sample_size"]
        assert (frame["status"] == "pass").all()


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent.parent.parent))
    from combopredict.tests.base import run_tests_with_report
    sys.exit(run_tests_with_report(__file__, 'cli'))
