"""
Tests for the CLI module.
"""
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from src.cli import app, parse_subset
from src.localization.analysis import ScenarioError
from src.localization.point_mass import DegeneratePosteriorError
from tests.conftest import EXAMPLE_YAML

runner = CliRunner()

BUNDLED_SCENARIO = Path(__file__).parent.parent / "data" / "scenarios" / "example_room.yaml"


@pytest.fixture
def two_beam_path(tmp_path):
    """Scenario file without the third beam."""
    path = tmp_path / "two_beams.yaml"
    path.write_text(EXAMPLE_YAML.replace("  - angle: 33.7\n    noise_rms: 0.05\n", ""))
    return path


def test_parse_subset():
    assert parse_subset("1, 3,2", 3) == (1, 3, 2)
    assert parse_subset(None, 3) == (1, 2, 3)
    with pytest.raises(ScenarioError):
        parse_subset("1,x", 3)


def test_estimate_command(example_yaml_path, tmp_path):
    """Test the estimate command writes text and JSON reports."""
    out = tmp_path / "out"
    result = runner.invoke(app, ["estimate", "--scenario", str(example_yaml_path), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "estimate_report.txt").exists()
    data = json.loads((out / "estimate_report.json").read_text())
    assert data["used_beams"] == [1, 2, 3]


def test_estimate_exports(example_yaml_path, tmp_path):
    """Test heatmap and grid exports for a chosen subset."""
    out = tmp_path / "out"
    result = runner.invoke(
        app,
        ["estimate", "-s", str(example_yaml_path), "--subset", "2,1", "-o", str(out), "--heatmap", "--export-grid"],
    )
    assert result.exit_code == 0, result.output
    assert (out / "posterior_1_2.pgm").read_bytes().startswith(b"P5\n40 60\n255\n")
    assert (out / "posterior_1_2.grid").read_text().splitlines()[0].startswith("40 60 1 ")


def test_estimate_bundled_example(tmp_path):
    """Test all three beams on the full grid give centimeter-level RMS."""
    out = tmp_path / "out"
    result = runner.invoke(app, ["estimate", "-s", str(BUNDLED_SCENARIO), "-o", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads((out / "estimate_report.json").read_text())
    assert abs(data["rms"][0] - 0.02) <= 0.02
    assert abs(data["rms"][1] - 0.03) <= 0.02
    assert data["mean"] == pytest.approx([2.0, 3.0], abs=0.05)


def test_estimate_missing_file(tmp_path):
    result = runner.invoke(app, ["estimate", "--scenario", str(tmp_path / "nope.yaml"), "-o", str(tmp_path)])
    assert result.exit_code == 2


def test_estimate_subset_out_of_range(example_yaml_path, tmp_path):
    """Test a beam number beyond the scenario is a usage error naming the entry."""
    result = runner.invoke(app, ["estimate", "-s", str(example_yaml_path), "--subset", "9", "-o", str(tmp_path)])
    assert result.exit_code == 2
    assert "subset[0]" in result.output


def test_estimate_bad_subset_token(example_yaml_path, tmp_path):
    result = runner.invoke(app, ["estimate", "-s", str(example_yaml_path), "--subset", "1,two", "-o", str(tmp_path)])
    assert result.exit_code == 2


def test_estimate_invalid_scenario(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(EXAMPLE_YAML.replace("  x1: 2.0\n", "  x1: 9.0\n"))
    result = runner.invoke(app, ["estimate", "-s", str(path), "-o", str(tmp_path)])
    assert result.exit_code == 2


def test_estimate_runtime_failure(example_yaml_path, tmp_path, monkeypatch):
    """Test filter failures map to exit code 1."""
    def broken(*args, **kwargs):
        raise DegeneratePosteriorError("no finite weight")

    monkeypatch.setattr("src.cli.run_scenario", broken)
    result = runner.invoke(app, ["estimate", "-s", str(example_yaml_path), "-o", str(tmp_path)])
    assert result.exit_code == 1


def test_table1_command(example_yaml_path, tmp_path):
    """Test the table is written and repeated runs are byte-identical."""
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        result = runner.invoke(app, ["table1", "-s", str(example_yaml_path), "-o", str(out)])
        assert result.exit_code == 0, result.output

    header = (first / "table1.csv").read_text().splitlines()[0]
    assert header == ",1,2,3,1+2,2+3,1+3,1+2+3"
    for name in ("table1.txt", "table1.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_table1_heatmaps(example_yaml_path, tmp_path):
    result = runner.invoke(app, ["table1", "-s", str(example_yaml_path), "-o", str(tmp_path), "--heatmap"])
    assert result.exit_code == 0, result.output
    assert len(list(tmp_path.glob("posterior_*.pgm"))) == 7


def test_table1_needs_three_beams(two_beam_path, tmp_path):
    result = runner.invoke(app, ["table1", "-s", str(two_beam_path), "-o", str(tmp_path)])
    assert result.exit_code == 2


def test_montecarlo_command(example_yaml_path, tmp_path):
    """Test a short Monte-Carlo run writes its covariance files."""
    result = runner.invoke(
        app, ["montecarlo", "-s", str(example_yaml_path), "--trials", "3", "--subset", "2", "-o", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    data = json.loads((tmp_path / "montecarlo.json").read_text())
    assert data["trials"] == 3
    assert data["used_beams"] == [2]
    assert "trials: 3" in (tmp_path / "montecarlo.txt").read_text()


@pytest.mark.parametrize("trials_arg", ["--trials=0", "--trials=-2"])
def test_montecarlo_invalid_trials(example_yaml_path, tmp_path, trials_arg):
    result = runner.invoke(app, ["montecarlo", "-s", str(example_yaml_path), trials_arg, "-o", str(tmp_path)])
    assert result.exit_code == 2


def test_montecarlo_invalid_workers(example_yaml_path, tmp_path):
    result = runner.invoke(
        app, ["montecarlo", "-s", str(example_yaml_path), "-n", "1", "--workers", "0", "-o", str(tmp_path)]
    )
    assert result.exit_code == 2
