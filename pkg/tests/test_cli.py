"""Tests for the narx-hysteresis command line."""

import json
import logging
from pathlib import Path

import pytest

from PyNarxHysteresis.cli import build_parser, main
from PyNarxHysteresis.config import default_config_path
from PyNarxHysteresis.const import EXIT_CONFIG, EXIT_OK
from PyNarxHysteresis.storage import read_dataset, read_json, read_selection_report

from .helpers import fixed_structures

_LOGGER = logging.getLogger(__name__)


@pytest.fixture
def short_config_file(tmp_path: Path) -> Path:
    """Shipped configuration with the benchmark structures and short records."""
    data = json.loads(default_config_path().read_text(encoding="utf-8"))
    for section, labels in fixed_structures().items():
        data[section]["structure"] = labels
    data["simulation"]["duration"] = 10.0
    data["validation"]["duration"] = 3.0
    data["compensation"]["duration"] = 3.0
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------


def test_parser_commands() -> None:
    """Every command is registered with the global options."""
    parser = build_parser()
    args = parser.parse_args(["--seed", "5", "--out", "x", "identify", "--dataset", "d.csv"])

    assert args.command == "identify"
    assert args.seed == 5
    assert args.out == "x"
    assert args.dataset == "d.csv"


def test_full_workflow(tmp_path: Path, short_config_file: Path) -> None:
    """Simulate, identify, analyze, synthesize, compensate and report."""
    _LOGGER.info("=== Testing CLI Workflow ===")

    out = tmp_path / "out"
    base = ["--config", str(short_config_file), "--out", str(out)]

    assert main([*base, "--seed", "11", "simulate-plant"]) == EXIT_OK
    assert (out / "training.csv").exists()

    assert main([*base, "identify", "--dataset", str(out / "training.csv")]) == EXIT_OK
    assert read_json(out / "identification.json")["classification"] == "continuum"

    assert (
        main([*base, "analyze", "--model", str(out / "model.json"), "--phi1", "0.28", "--points", "11"])
        == EXIT_OK
    )
    assert (out / "curve_loading.csv").exists()
    assert (out / "curve_unloading.csv").exists()

    assert main([*base, "synthesize", "--model", str(out / "model.json")]) == EXIT_OK
    law = read_json(out / "law_direct.json")
    assert law["law_kind"] == "direct"

    assert (
        main([*base, "compensate", "--law", str(out / "law_direct.json"), "--baseline"])
        == EXIT_OK
    )
    metrics = read_json(out / "metrics_direct.json")
    assert metrics["strategy"] == "direct"
    assert metrics["baseline"] is not None

    assert main([*base, "report"]) == EXIT_OK
    report = read_json(out / "report.json")
    assert set(report["entries"]) == {"identification.json", "metrics_direct.json"}

    manifest = read_json(out / "manifest.json")
    assert [run["command"] for run in manifest["runs"]] == [
        "simulate-plant",
        "identify",
        "analyze",
        "synthesize",
        "compensate",
        "report",
    ]
    assert manifest["runs"][0]["seed"] == 11
    assert manifest["runs"][1]["inputs"][0]["path"].endswith("training.csv")
    assert "law_direct.json" in manifest["artifacts"]
    _LOGGER.info("Manifest lists %d artifact(s)", len(manifest["artifacts"]))


def test_uncompensated_run(tmp_path: Path, short_config_file: Path) -> None:
    out = tmp_path / "out"

    code = main(["--config", str(short_config_file), "--out", str(out), "compensate", "--no-compensation"])

    assert code == EXIT_OK
    report = read_json(out / "metrics_none.json")
    assert report["strategy"] == "none"
    assert report["baseline"] is None
    assert (out / "compensation_none.csv").exists()


def test_errors_exit_with_code(
    tmp_path: Path, short_config_file: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Failures print a one-line diagnostic and return the error's exit code."""
    _LOGGER.info("=== Testing CLI Error Reporting ===")

    out = tmp_path / "out"
    base = ["--config", str(short_config_file), "--out", str(out)]

    code = main([*base, "identify", "--dataset", str(tmp_path / "missing.csv")])
    assert code == EXIT_CONFIG
    assert "error code=2 kind=DataFormatError" in capsys.readouterr().err

    code = main([*base, "compensate"])
    assert code == EXIT_CONFIG
    assert "kind=ConfigError" in capsys.readouterr().err

    code = main(["--config", str(tmp_path / "nothing.json"), "--out", str(out), "report"])
    assert code == EXIT_CONFIG

    code = main([*base, "report"])
    assert code == EXIT_CONFIG
    assert not (out / "manifest.json").exists()


def test_simulate_plant_overrides(tmp_path: Path, short_config_file: Path) -> None:
    """Grid and Bouc-Wen parameters can be overridden per run."""
    out = tmp_path / "out"
    base = ["--config", str(short_config_file), "--out", str(out), "simulate-plant"]

    code = main(
        [
            *base,
            "--duration", "1.0",
            "--sample-time", "0.002",
            "--d-p", "1.2",
            "--beta", "0.01",
            "--name", "custom.csv",
        ]
    )

    assert code == EXIT_OK
    u, y, metadata = read_dataset(out / "custom.csv")
    assert len(u) == len(y) == 500
    assert metadata["sample_time"] == pytest.approx(0.002)
    assert metadata["dt"] == pytest.approx(0.001)
    assert metadata["params"] == {"d_p": 1.2, "A": 0.9, "beta": 0.01, "gamma": 0.008}

    code = main([*base, "--signal", "validation", "--A", "0.8", "--gamma", "0.0"])
    assert code == EXIT_OK
    _, _, metadata = read_dataset(out / "validation.csv")
    assert metadata["params"] == {"d_p": 1.6, "A": 0.8, "beta": 0.008, "gamma": 0.0}


def test_simulate_plant_invalid_override(
    tmp_path: Path, short_config_file: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    out = tmp_path / "out"
    base = ["--config", str(short_config_file), "--out", str(out), "simulate-plant"]

    assert main([*base, "--sample-time", "0.0015"]) == EXIT_CONFIG
    assert "kind=ConfigError" in capsys.readouterr().err

    assert main([*base, "--beta", "-1.0"]) == EXIT_CONFIG
    assert "plant.beta" in capsys.readouterr().err
    assert not (out / "training.csv").exists()


def test_identify_writes_selection_report(tmp_path: Path) -> None:
    """Identification with selection leaves the ranked terms next to the model."""
    data = json.loads(default_config_path().read_text(encoding="utf-8"))
    data["simulation"]["duration"] = 4.0
    data["identification"]["max_terms"] = 4
    config_file = tmp_path / "selection.json"
    config_file.write_text(json.dumps(data), encoding="utf-8")
    out = tmp_path / "out"
    base = ["--config", str(config_file), "--out", str(out)]

    assert main([*base, "simulate-plant"]) == EXIT_OK
    assert main([*base, "identify", "--dataset", str(out / "training.csv")]) == EXIT_OK

    report = read_selection_report(out / "selection.csv")
    assert len(report.terms) == 4
    assert report.aic is not None
    assert report.chosen_size == len(read_json(out / "model.json")["terms"])
    manifest = read_json(out / "manifest.json")
    assert "selection.csv" in manifest["artifacts"]
