"""Tests for configuration loading."""

import pytest

from src.config import EncoderKind, get_settings
from src.core.exceptions import ConfigurationError
from src.operations.fixture import run_validate_config


def test_defaults(settings):
    assert settings.runtime.seed == 13
    assert settings.candgen.trigram_threshold == pytest.approx(0.60)
    assert settings.candgen.top_n == 100
    assert settings.typing.encoder is EncoderKind.RECURRENT
    assert settings.ranker.hidden == (500, 300)


def test_ini_sections_and_candgen_letters(tmp_path):
    config = tmp_path / "ned.ini"
    config.write_text(
        "[runtime]\nseed = 7\n\n[candgen]\nT = 0.5\nN = 20\n\n[ranker]\nhidden = 64, 32\n",
        encoding="utf-8",
    )
    settings = get_settings(config)
    assert settings.runtime.seed == 7
    assert settings.candgen.trigram_threshold == pytest.approx(0.5)
    assert settings.candgen.top_n == 20
    assert settings.ranker.hidden == (64, 32)


def test_cli_overrides_beat_the_file_and_none_is_ignored(tmp_path):
    config = tmp_path / "ned.ini"
    config.write_text("[runtime]\nseed = 7\njobs = 2\n", encoding="utf-8")
    settings = get_settings(config, {"runtime": {"seed": 99, "jobs": None}})
    assert settings.runtime.seed == 99
    assert settings.runtime.jobs == 2


def test_candgen_letter_override_replaces_the_file(tmp_path):
    config = tmp_path / "ned.ini"
    config.write_text("[candgen]\nT = 0.5\n", encoding="utf-8")
    assert get_settings(config, {"candgen": {"T": 0.7}}).candgen.trigram_threshold == pytest.approx(0.7)


def test_environment_variables(monkeypatch):
    monkeypatch.setenv("NED_RANKER__THRESHOLD", "0.1")
    assert get_settings().ranker.threshold == pytest.approx(0.1)


@pytest.mark.parametrize("section, key, value", [
    ("typing", "encoder", "cnn"),
    ("candgen", "T", "1.5"),
    ("runtime", "jobs", "0"),
])
def test_invalid_values_raise_configuration_error(tmp_path, section, key, value):
    config = tmp_path / "bad.ini"
    config.write_text(f"[{section}]\n{key} = {value}\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        get_settings(config)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        get_settings(tmp_path / "absent.ini")


def test_validate_config_flattens_sections(settings):
    result = run_validate_config(settings)
    assert result["success"]
    assert result["settings"]["candgen.trigram_threshold"] == pytest.approx(0.60)
    assert result["settings"]["runtime.seed"] == 13
