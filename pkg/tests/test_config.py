"""Test parameter loading."""

from pathlib import Path

import pytest

from config.settings import CONFIG_ENV_VAR, DEFAULT_CONFIG_PATH, ParameterBundle, load_params, resolve_config_path
from utils.exceptions import ConfigError


def test_no_config_gives_defaults(monkeypatch):
    """Test built-in defaults when no file is named."""
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    monkeypatch.setattr("config.settings.load_dotenv", lambda: None)
    assert load_params() == ParameterBundle()


def test_empty_file_gives_defaults(tmp_path):
    """Test that an empty YAML document is the default bundle."""
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_params(path) == ParameterBundle()


def test_shipped_config_matches_defaults():
    """Test that config.yaml carries the default values."""
    assert load_params(DEFAULT_CONFIG_PATH) == ParameterBundle()


def test_override_one_value(tmp_path):
    """Test a partial section override."""
    path = tmp_path / "params.yaml"
    path.write_text("sign:\n  dbscan_eps: 30.0\n")
    bundle = load_params(path)
    assert bundle.sign.dbscan_eps == 30.0
    assert bundle.sign.r_stop == 5.0
    assert bundle.light == ParameterBundle().light


def test_threshold_ordering_violation(tmp_path):
    """Test that crossed eta thresholds name the light section."""
    path = tmp_path / "params.yaml"
    path.write_text("light:\n  eta_left: 0.05\n")
    with pytest.raises(ConfigError) as exc_info:
        load_params(path)
    assert exc_info.value.key_path.startswith("light")


def test_unknown_key_names_its_path(tmp_path):
    """Test that an unknown key reports its dotted path."""
    path = tmp_path / "params.yaml"
    path.write_text("sign:\n  bogus: 1\n")
    with pytest.raises(ConfigError) as exc_info:
        load_params(path)
    assert exc_info.value.key_path == "sign.bogus"
    assert str(exc_info.value).startswith("sign.bogus")


def test_missing_file(tmp_path):
    """Test a config path that does not exist."""
    with pytest.raises(ConfigError):
        load_params(tmp_path / "nope.yaml")


def test_top_level_must_be_mapping(tmp_path):
    """Test that a YAML list is rejected."""
    path = tmp_path / "params.yaml"
    path.write_text("- light\n- sign\n")
    with pytest.raises(ConfigError):
        load_params(path)


def test_env_var_selects_file(tmp_path, monkeypatch):
    """Test that TIM_CONFIG is honoured when no path is passed."""
    path = tmp_path / "params.yaml"
    path.write_text("quality:\n  window: 2.0\n")
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert resolve_config_path() == Path(path)
    assert load_params().quality.window == 2.0


def test_explicit_path_wins_over_env(tmp_path, monkeypatch):
    """Test precedence of the explicit path."""
    monkeypatch.setenv(CONFIG_ENV_VAR, str(tmp_path / "other.yaml"))
    assert resolve_config_path("mine.yaml") == Path("mine.yaml")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
