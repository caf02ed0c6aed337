"""Tests for the Typer command-line interface."""

import pytest
from typer.testing import CliRunner

from main import app

runner = CliRunner()


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    # logs/ned.log is relative to the working directory
    monkeypatch.chdir(tmp_path)


def test_validate_config_prints_effective_settings():
    result = runner.invoke(app, ["--seed", "5", "validate-config"])
    assert result.exit_code == 0
    assert "runtime.seed" in result.output
    assert "candgen.trigram_threshold" in result.output


def test_synth_fixture_writes_inputs(tmp_path):
    result = runner.invoke(app, ["synth-fixture", "fixture", "--train-docs", "5", "--test-docs", "3"])
    assert result.exit_code == 0
    for name in ("kb.tsv", "types.tsv", "surface_forms.tsv", "train.txt", "test.txt", "config.ini"):
        assert (tmp_path / "fixture" / name).exists()


def test_synth_fixture_is_seeded(tmp_path):
    runner.invoke(app, ["--seed", "3", "synth-fixture", "a", "--train-docs", "4", "--test-docs", "2"])
    runner.invoke(app, ["--seed", "3", "synth-fixture", "b", "--train-docs", "4", "--test-docs", "2"])
    assert (tmp_path / "a" / "train.txt").read_text() == (tmp_path / "b" / "train.txt").read_text()


def test_missing_artifact_exits_with_code_one(tmp_path):
    result = runner.invoke(app, ["evaluate", str(tmp_path / "absent.corpus"), str(tmp_path / "absent.tsv")])
    assert result.exit_code == 1
    assert "Error" in result.output


def test_invalid_option_value_exits_with_code_one(tmp_path):
    result = runner.invoke(app, ["candgen", "c", "k", "s", "out", "--T", "1.5"])
    assert result.exit_code == 1


def test_missing_config_file_exits_with_code_one():
    result = runner.invoke(app, ["--config", "absent.ini", "validate-config"])
    assert result.exit_code == 1


def test_candgen_options_reach_the_operation(tmp_path, mocker):
    (tmp_path / "ned.ini").write_text("[candgen]\nT = 0.5\nN = 20\n", encoding="utf-8")
    run = mocker.patch("main.run_candgen", return_value={
        "success": True, "mentions": 4, "candidates": 9, "empty_mentions": 1,
        "gold_recall": {"stage1": 75.0, "N=20": 75.0},
    })
    result = runner.invoke(app, ["--config", "ned.ini", "--seed", "4", "candgen", "c", "k", "s", "out", "--T", "0.7"])
    assert result.exit_code == 0
    settings = run.call_args.args[0]
    assert settings.candgen.trigram_threshold == 0.7
    assert settings.candgen.top_n == 20
    assert settings.runtime.seed == 4
    assert "Gold recall stage1" in result.output


def test_operation_errors_are_logged_and_exit_one(mocker):
    mocker.patch("main.run_randtest", side_effect=ValueError("boom"))
    result = runner.invoke(app, ["randtest", "c", "a", "b"])
    assert result.exit_code == 1
    assert "boom" in result.output
